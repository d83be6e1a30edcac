#include <benchmark/benchmark.h>

#include <random>

#include "factalign/grpo.hpp"
#include "factalign/rng.hpp"

namespace fa = factalign;

namespace {

struct Problem {
  fa::ToyPolicy policy;
  fa::ToyPolicy ref;
  fa::GroupRollout rollout;
  fa::GRPOConfig config;
};

Problem make_problem(std::size_t vocab, std::size_t len, std::size_t group) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::string> v;
  for (std::size_t i = 0; i < vocab; ++i) v.push_back("t" + std::to_string(i));
  Problem p{fa::ToyPolicy(v, len, 0), fa::ToyPolicy(v, len, 0), {}, {}};
  for (auto& x : p.policy.logits()) x = u(gen);
  for (auto& x : p.ref.logits()) x = u(gen);
  p.config.group_size = group;
  p.config.kl_coef = 0.1;
  fa::Rng rng(9);
  for (std::size_t i = 0; i < group; ++i) {
    auto seq = p.policy.sample(rng);
    p.rollout.token_logps_old.push_back(p.policy.sequence_log_probs(seq));
    p.rollout.responses.push_back(std::move(seq));
    p.rollout.rewards.push_back(u(gen));
  }
  p.rollout.advantages = fa::normalize_advantages(p.rollout.rewards);
  return p;
}

void BM_Objective(benchmark::State& state) {
  const auto p = make_problem(32, 8, static_cast<std::size_t>(state.range(0)));
  const bool with_gradient = state.range(1) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fa::grpo_objective(p.rollout, p.policy, p.ref, p.config, with_gradient).objective);
  }
}
BENCHMARK(BM_Objective)->Args({8, 0})->Args({8, 1})->Args({64, 1});

void BM_TrainStep(benchmark::State& state) {
  fa::ToyEnvironment env;
  env.vocabulary = {"STOP"};
  for (int i = 0; i < 15; ++i) env.vocabulary.push_back("f" + std::to_string(i));
  for (int i = 0; i < 3; ++i) {
    fa::ToyQuery q{"q" + std::to_string(i), "query", {}};
    q.checklist.query_id = q.id;
    for (int k = 0; k < 4; ++k) q.checklist.items.push_back("f" + std::to_string(i * 4 + k));
    env.queries.push_back(q);
  }
  fa::GRPOConfig c;
  c.steps = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fa::train(env, c, {}).trace.size());
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMicrosecond);

}  // namespace
