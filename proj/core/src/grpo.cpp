#include "factalign/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "factalign/error.hpp"
#include "factalign/judge.hpp"
#include "factalign/reference_judges.hpp"
#include "factalign/rng.hpp"
#include "factalign/text.hpp"

namespace factalign {

using nlohmann::json;

ToyPolicy::ToyPolicy(std::vector<std::string> vocabulary, std::size_t max_length,
                     std::size_t stop_index)
    : vocabulary_(std::move(vocabulary)), max_length_(max_length), stop_(stop_index) {
  if (vocabulary_.size() < 2) throw Error(ErrorCode::kInvalidConfig, "vocabulary needs >= 2 symbols");
  if (max_length_ == 0) throw Error(ErrorCode::kInvalidConfig, "max_length must be >= 1");
  if (stop_ >= vocabulary_.size()) throw Error(ErrorCode::kInvalidConfig, "stop index out of range");
  logits_.assign(max_length_ * vocabulary_.size(), 0.0);
}

std::vector<double> ToyPolicy::log_probs(std::size_t pos) const {
  const std::size_t v = vocab_size();
  const double* row = logits_.data() + pos * v;
  const double mx = *std::max_element(row, row + v);
  double z = 0.0;
  for (std::size_t i = 0; i < v; ++i) z += std::exp(row[i] - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(v);
  for (std::size_t i = 0; i < v; ++i) out[i] = row[i] - lse;
  return out;
}

std::vector<double> ToyPolicy::probs(std::size_t pos) const {
  auto lp = log_probs(pos);
  for (auto& x : lp) x = std::exp(x);
  return lp;
}

double ToyPolicy::log_prob(std::size_t pos, std::size_t tok) const {
  return log_probs(pos)[tok];
}

double ToyPolicy::entropy(std::size_t pos) const {
  double h = 0.0;
  for (double lp : log_probs(pos)) h -= std::exp(lp) * lp;
  return h;
}

std::vector<std::size_t> ToyPolicy::sample(Rng& rng) const {
  std::vector<std::size_t> seq;
  for (std::size_t pos = 0; pos < max_length_; ++pos) {
    const auto p = probs(pos);
    double u = rng.uniform();
    std::size_t tok = p.size() - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (u < p[i]) {
        tok = i;
        break;
      }
      u -= p[i];
    }
    seq.push_back(tok);
    if (tok == stop_) break;
  }
  return seq;
}

std::vector<double> ToyPolicy::sequence_log_probs(const std::vector<std::size_t>& seq) const {
  std::vector<double> out;
  out.reserve(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) out.push_back(log_prob(t, seq[t]));
  return out;
}

bool ToyPolicy::same_shape(const ToyPolicy& other) const {
  return vocabulary_ == other.vocabulary_ && max_length_ == other.max_length_;
}

double kl_divergence(const ToyPolicy& policy, const ToyPolicy& ref, std::size_t position) {
  if (!policy.same_shape(ref)) throw Error(ErrorCode::kInvalidArgument, "policy shapes differ");
  const auto lp = policy.log_probs(position);
  const auto lq = ref.log_probs(position);
  double kl = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
  return std::max(kl, 0.0);
}

void GRPOConfig::validate() const {
  if (group_size < 2) throw Error(ErrorCode::kInvalidConfig, "group_size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "clip_epsilon must be in (0,1)");
  }
  if (!(kl_coef >= 0.0) || !std::isfinite(kl_coef)) {
    throw Error(ErrorCode::kInvalidConfig, "kl_coef must be finite and >= 0");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be finite and >= 0");
  }
  if (epochs == 0) throw Error(ErrorCode::kInvalidConfig, "epochs must be >= 1");
}

std::vector<double> normalize_advantages(const std::vector<double>& rewards) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kGroupTooSmall,
                "group of " + std::to_string(rewards.size()) + " rewards");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

double importance_ratio(double logp_new, double logp_old) {
  return std::exp(logp_new - logp_old);
}

double clipped_term(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

ObjectiveResult grpo_objective(const GroupRollout& rollout, const ToyPolicy& policy,
                               const ToyPolicy& ref, const GRPOConfig& config,
                               bool with_gradient) {
  const std::size_t g = rollout.responses.size();
  if (g == 0) throw Error(ErrorCode::kGroupTooSmall, "empty rollout", rollout.query_id);
  if (rollout.advantages.size() != g || rollout.token_logps_old.size() != g) {
    throw Error(ErrorCode::kInvalidArgument, "rollout fields have mismatched sizes",
                rollout.query_id);
  }
  if (!policy.same_shape(ref)) throw Error(ErrorCode::kInvalidArgument, "policy shapes differ");

  const std::size_t v = policy.vocab_size();
  const std::size_t l = policy.max_length();
  std::vector<std::vector<double>> lp(l), lq(l);
  std::vector<double> kl(l);
  for (std::size_t pos = 0; pos < l; ++pos) {
    lp[pos] = policy.log_probs(pos);
    lq[pos] = ref.log_probs(pos);
    double k = 0.0;
    for (std::size_t u = 0; u < v; ++u) k += std::exp(lp[pos][u]) * (lp[pos][u] - lq[pos][u]);
    kl[pos] = k;
  }

  ObjectiveResult res;
  if (with_gradient) res.gradient.assign(policy.logits().size(), 0.0);
  std::size_t tokens = 0;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < g; ++i) {
    const auto& seq = rollout.responses[i];
    if (seq.empty()) throw Error(ErrorCode::kEmptySequence, "response " + std::to_string(i), rollout.query_id);
    if (seq.size() > l || rollout.token_logps_old[i].size() != seq.size()) {
      throw Error(ErrorCode::kInvalidArgument, "response " + std::to_string(i) + " has bad length",
                  rollout.query_id);
    }
    const double a = rollout.advantages[i];
    const double w = 1.0 / (static_cast<double>(g) * static_cast<double>(seq.size()));
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const std::size_t tok = seq[t];
      const double r = importance_ratio(lp[t][tok], rollout.token_logps_old[i][t]);
      const double unclipped = r * a;
      const double term = clipped_term(r, a, config.clip_epsilon);
      const bool active = unclipped <= term;
      res.objective += w * (term - config.kl_coef * kl[t]);
      res.mean_ratio += r;
      res.mean_kl += kl[t];
      ++tokens;
      if (!active) ++clipped;
      if (!with_gradient) continue;

      double* grad = res.gradient.data() + t * v;
      for (std::size_t u = 0; u < v; ++u) {
        const double p = std::exp(lp[t][u]);
        double d = 0.0;
        if (active) d += a * r * ((u == tok ? 1.0 : 0.0) - p);
        if (config.kl_coef != 0.0) {
          d -= config.kl_coef * p * ((lp[t][u] - lq[t][u]) - kl[t]);
        }
        grad[u] += w * d;
      }
    }
  }
  res.mean_ratio /= static_cast<double>(tokens);
  res.mean_kl /= static_cast<double>(tokens);
  res.clip_fraction = static_cast<double>(clipped) / static_cast<double>(tokens);
  return res;
}

// --- environment -------------------------------------------------------------

ToyEnvironment ToyEnvironment::from_json(const json& j) {
  ToyEnvironment env;
  try {
    env.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    env.stop_symbol = j.value("stop_symbol", env.stop_symbol);
    env.negation_prefix = j.value("negation_prefix", env.negation_prefix);
    env.max_length = j.value("max_length", env.max_length);
    for (const auto& q : j.at("queries")) {
      ToyQuery tq;
      tq.id = q.at("id").get<std::string>();
      tq.text = q.value("text", tq.id);
      tq.checklist.query_id = tq.id;
      tq.checklist.items = q.at("checklist").get<std::vector<std::string>>();
      env.queries.push_back(std::move(tq));
    }
    const json truth = j.value("truth", json::object());
    for (const auto& [k, p] : truth.items()) {
      env.truth.emplace(k, p.get<double>());
    }
    env.truth_default = j.value("truth_default", env.truth_default);
    env.general = j.value("general", env.general);
    if (j.contains("length_policy")) {
      const auto& lp = j["length_policy"];
      env.length_policy.max_length = lp.at("max_length").get<std::size_t>();
      env.length_policy.critical_length = lp.at("critical_length").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("bad environment: ") + e.what());
  }
  if (env.queries.empty()) throw Error(ErrorCode::kInvalidConfig, "environment has no queries");
  env.length_policy.validate();
  for (const auto& [k, p] : env.truth) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "truth outside [0,1]", k);
  }
  (void)env.stop_index();
  return env;
}

ToyEnvironment ToyEnvironment::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open environment", path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("invalid JSON: ") + e.what(), path.string());
  }
}

std::size_t ToyEnvironment::stop_index() const {
  auto it = std::find(vocabulary.begin(), vocabulary.end(), stop_symbol);
  if (it == vocabulary.end()) {
    throw Error(ErrorCode::kInvalidConfig, "stop symbol not in vocabulary", stop_symbol);
  }
  return static_cast<std::size_t>(it - vocabulary.begin());
}

std::vector<std::string> ToyEnvironment::render_claims(const std::vector<std::size_t>& seq) const {
  const std::size_t stop = stop_index();
  std::vector<std::string> out;
  for (auto tok : seq) {
    if (tok == stop) continue;
    const auto& sym = vocabulary.at(tok);
    if (!negation_prefix.empty() && sym.starts_with(negation_prefix)) {
      out.push_back(std::string(text::kNegationMarker) + " " + sym.substr(negation_prefix.size()));
    } else {
      out.push_back(sym);
    }
  }
  return out;
}

std::string ToyEnvironment::render_answer(const std::vector<std::size_t>& seq) const {
  return text::join(render_claims(seq), " ");
}

ToyPolicy ToyEnvironment::initial_policy() const {
  return ToyPolicy(vocabulary, max_length, stop_index());
}

RewardBreakdown score_toy_response(const ToyEnvironment& env, const ToyQuery& query,
                                   const std::vector<std::size_t>& seq,
                                   const RewardSpec& spec) {
  static const reference::ChecklistVerifier kVerifier;
  const auto claims = env.render_claims(seq);
  const auto answer = text::join(claims, " ");
  const auto parsed = parse_structured_response("<think></think><answer>" + answer + "</answer>");

  RewardInputs in;
  in.response = &parsed;
  in.verdicts = classify_checklist(kVerifier, query.text, answer, query.checklist);
  std::vector<double> probs;
  for (const auto& c : claims) {
    auto it = env.truth.find(c);
    probs.push_back(it == env.truth.end() ? env.truth_default : it->second);
  }
  in.truth_probs = std::move(probs);
  in.general = env.general;
  in.answer_length = claims.size();
  return compute_breakdown(in, spec.mode, spec.weights, env.length_policy);
}

nlohmann::ordered_json to_json(const TraceRow& row) {
  return {{"step", row.step},
          {"mean_reward", row.mean_reward},
          {"recall", row.recall},
          {"precision", row.precision},
          {"checklist", row.checklist},
          {"truth", row.truth},
          {"kl", row.kl},
          {"entropy", row.entropy},
          {"response_len", row.response_len},
          {"mean_ratio", row.mean_ratio},
          {"clip_fraction", row.clip_fraction}};
}

TrainResult train(const ToyEnvironment& env, const GRPOConfig& config, const RewardSpec& spec) {
  config.validate();
  if (spec.mode != RewardMode::kChecklistOnly) spec.weights.validate();

  ToyPolicy policy = env.initial_policy();
  const ToyPolicy ref = policy;
  Rng rng(config.seed);
  TrainResult result;
  const double nq = static_cast<double>(env.queries.size());

  for (std::size_t step = 0; step < config.steps; ++step) {
    TraceRow row;
    row.step = step;
    for (std::size_t pos = 0; pos < policy.max_length(); ++pos) {
      row.kl += kl_divergence(policy, ref, pos);
      row.entropy += policy.entropy(pos);
    }
    row.kl /= static_cast<double>(policy.max_length());
    row.entropy /= static_cast<double>(policy.max_length());

    std::vector<GroupRollout> batch;
    batch.reserve(env.queries.size());
    const double denom = nq * static_cast<double>(config.group_size);
    for (const auto& q : env.queries) {
      GroupRollout ro;
      ro.query_id = q.id;
      for (std::size_t i = 0; i < config.group_size; ++i) {
        auto seq = policy.sample(rng);
        const auto b = score_toy_response(env, q, seq, spec);
        row.mean_reward += b.total / denom;
        row.recall += b.recall / denom;
        row.precision += b.precision / denom;
        row.checklist += b.checklist / denom;
        row.truth += b.truth / denom;
        row.response_len += static_cast<double>(seq.size()) / denom;
        ro.token_logps_old.push_back(policy.sequence_log_probs(seq));
        ro.token_logps_new.push_back(ro.token_logps_old.back());
        ro.rewards.push_back(b.total);
        ro.responses.push_back(std::move(seq));
      }
      ro.advantages = normalize_advantages(ro.rewards);
      batch.push_back(std::move(ro));
    }

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      std::vector<double> grad(policy.logits().size(), 0.0);
      double ratio = 0.0, clip = 0.0;
      for (const auto& ro : batch) {
        auto obj = grpo_objective(ro, policy, ref, config);
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += obj.gradient[k] / nq;
        ratio += obj.mean_ratio / nq;
        clip += obj.clip_fraction / nq;
      }
      if (epoch == 0) {
        row.mean_ratio = ratio;
        row.clip_fraction = clip;
      }
      auto& logits = policy.logits();
      for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += config.learning_rate * grad[k];
    }
    result.trace.push_back(row);
  }
  result.policy = std::move(policy);
  return result;
}

}  // namespace factalign
