#pragma once
// Random small GRPO problems and a central-difference gradient check.

#include <cmath>
#include <string>
#include <vector>

#include "factalign/grpo.hpp"
#include "factalign/rng.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace grpo_case {

struct Instance {
  factalign::ToyPolicy policy;
  factalign::ToyPolicy ref;
  factalign::GroupRollout rollout;
  factalign::GRPOConfig config;
};

inline factalign::ToyPolicy random_policy(gen::Source& g, std::size_t vocab, std::size_t len,
                                          double scale) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < vocab; ++i) v.push_back("t" + std::to_string(i));
  factalign::ToyPolicy p(v, len, 0);
  for (auto& x : p.logits()) x = g.real(-scale, scale);
  return p;
}

// Sampling ("old") policy is a perturbation of the current one, so ratios
// spread around 1 and some tokens fall in the clipped region.
inline Instance make(gen::Source& g) {
  Instance in;
  const auto vocab = g.index(3, 7);
  const auto len = g.index(2, 5);
  in.policy = random_policy(g, vocab, len, 1.5);
  in.ref = random_policy(g, vocab, len, 1.5);
  auto old = in.policy;
  for (auto& x : old.logits()) x += g.real(-0.4, 0.4);

  in.config.group_size = g.index(2, 6);
  in.config.clip_epsilon = g.real(0.1, 0.3);
  in.config.kl_coef = g.coin() ? 0.0 : g.real(0.01, 2.0);

  factalign::Rng rng(g.index(0, 1u << 30));
  in.rollout.query_id = "q";
  for (std::size_t i = 0; i < in.config.group_size; ++i) {
    auto seq = old.sample(rng);
    in.rollout.responses.push_back(seq);
    in.rollout.token_logps_old.push_back(old.sequence_log_probs(seq));
    in.rollout.rewards.push_back(g.unit());
  }
  in.rollout.advantages = oracle::advantages(in.rollout.rewards);
  return in;
}

inline oracle::ObjectiveInput to_oracle(const Instance& in) {
  oracle::ObjectiveInput o;
  const auto v = in.policy.vocab_size();
  for (std::size_t t = 0; t < in.policy.max_length(); ++t) {
    o.logits.emplace_back(in.policy.logits().begin() + t * v, in.policy.logits().begin() + (t + 1) * v);
    o.ref_logits.emplace_back(in.ref.logits().begin() + t * v, in.ref.logits().begin() + (t + 1) * v);
  }
  o.responses = in.rollout.responses;
  o.old_logps = in.rollout.token_logps_old;
  o.advantages = in.rollout.advantages;
  o.epsilon = in.config.clip_epsilon;
  o.beta = in.config.kl_coef;
  return o;
}

// max |g - fd| / max(|fd|_inf, 1e-6). Groups of identical responses have an
// exactly zero gradient; the floor keeps central-difference roundoff (~1e-11)
// from being reported as a relative error there.
inline double gradient_relative_error(const Instance& in, double h = 1e-6) {
  const auto analytic =
      factalign::grpo_objective(in.rollout, in.policy, in.ref, in.config).gradient;
  auto p = in.policy;
  double worst = 0.0, scale = 1e-6;
  std::vector<double> fd(analytic.size());
  for (std::size_t k = 0; k < fd.size(); ++k) {
    const double x = p.logits()[k];
    p.logits()[k] = x + h;
    const double up = factalign::grpo_objective(in.rollout, p, in.ref, in.config, false).objective;
    p.logits()[k] = x - h;
    const double down = factalign::grpo_objective(in.rollout, p, in.ref, in.config, false).objective;
    p.logits()[k] = x;
    fd[k] = (up - down) / (2 * h);
    scale = std::max(scale, std::abs(fd[k]));
  }
  for (std::size_t k = 0; k < fd.size(); ++k) worst = std::max(worst, std::abs(analytic[k] - fd[k]));
  return worst / scale;
}

}  // namespace grpo_case
