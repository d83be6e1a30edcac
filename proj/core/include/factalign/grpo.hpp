#pragma once
// Group-relative policy optimization on a toy categorical sequence policy.
//
// The policy is a table of logits, one row per output position; a response is
// sampled position by position until the stop symbol (which is kept as the
// last token) or max_length tokens. Rewards come from reward_core through the
// reference checklist verifier and a truth-probability table, so the whole
// loop is deterministic given a seed.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factalign/claims.hpp"
#include "factalign/reward.hpp"

namespace factalign {

class Rng;

class ToyPolicy {
 public:
  ToyPolicy() = default;
  // Zero logits (uniform). `stop` must be a member of `vocabulary`.
  ToyPolicy(std::vector<std::string> vocabulary, std::size_t max_length,
            std::size_t stop_index);

  std::size_t vocab_size() const { return vocabulary_.size(); }
  std::size_t max_length() const { return max_length_; }
  std::size_t stop_index() const { return stop_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  // Row-major [max_length x vocab_size].
  std::vector<double>& logits() { return logits_; }
  const std::vector<double>& logits() const { return logits_; }
  double& logit(std::size_t pos, std::size_t tok) { return logits_[pos * vocab_size() + tok]; }

  std::vector<double> probs(std::size_t pos) const;
  std::vector<double> log_probs(std::size_t pos) const;
  double log_prob(std::size_t pos, std::size_t tok) const;
  double entropy(std::size_t pos) const;

  // Token ids; ends with stop_index() unless max_length was reached first.
  std::vector<std::size_t> sample(Rng& rng) const;
  std::vector<double> sequence_log_probs(const std::vector<std::size_t>& seq) const;

  bool same_shape(const ToyPolicy& other) const;

 private:
  std::vector<std::string> vocabulary_;
  std::size_t max_length_ = 0;
  std::size_t stop_ = 0;
  std::vector<double> logits_;
};

// Exact KL(policy || ref) at one position.
double kl_divergence(const ToyPolicy& policy, const ToyPolicy& ref, std::size_t position);

struct GroupRollout {
  std::string query_id;
  std::vector<std::vector<std::size_t>> responses;
  std::vector<std::vector<double>> token_logps_new;
  std::vector<std::vector<double>> token_logps_old;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

struct GRPOConfig {
  std::size_t group_size = 8;
  double clip_epsilon = 0.2;
  double kl_coef = 0.0;
  double learning_rate = 1.0;
  // Gradient steps taken on each sampled batch; 1 keeps the sampling policy
  // and the optimized policy equal at the first step.
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::size_t steps = 200;

  // Throws InvalidConfig.
  void validate() const;
};

// (R_i - mean) / std with the population std; all zero when std < 1e-12.
// Throws GroupTooSmall for fewer than 2 rewards.
std::vector<double> normalize_advantages(const std::vector<double>& rewards);

double importance_ratio(double logp_new, double logp_old);
double clipped_term(double ratio, double advantage, double epsilon);

struct ObjectiveResult {
  double objective = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;  // share of tokens where the clipped branch is active
  double mean_kl = 0.0;        // mean over tokens of KL(policy || ref) at their position
  std::vector<double> gradient;  // d objective / d logits, same layout as ToyPolicy
};

// Clipped GRPO objective for one group. Log-probs under `policy` are recomputed
// from the responses; rollout.token_logps_old supplies the sampling policy.
// Throws EmptySequence if any response is empty.
ObjectiveResult grpo_objective(const GroupRollout& rollout, const ToyPolicy& policy,
                               const ToyPolicy& ref, const GRPOConfig& config,
                               bool with_gradient = true);

// --- Synthetic environment -------------------------------------------------

struct ToyQuery {
  std::string id;
  std::string text;
  Checklist checklist;
};

struct ToyEnvironment {
  std::vector<std::string> vocabulary;
  std::string stop_symbol = "STOP";
  // Symbols starting with this prefix assert the negation of the fact named by
  // the remainder and render as "NOT TRUE: <fact>".
  std::string negation_prefix = "~";
  std::size_t max_length = 8;
  std::vector<ToyQuery> queries;
  std::map<std::string, double, std::less<>> truth;  // keyed by rendered claim
  double truth_default = 0.5;
  double general = 0.0;
  LengthPolicy length_policy{8, 2, LengthUnit::kWhitespaceWords};

  static ToyEnvironment from_json(const nlohmann::json& j);
  static ToyEnvironment from_file(const std::filesystem::path& path);

  std::size_t stop_index() const;
  // Rendered claims, one per non-stop symbol.
  std::vector<std::string> render_claims(const std::vector<std::size_t>& seq) const;
  std::string render_answer(const std::vector<std::size_t>& seq) const;
  ToyPolicy initial_policy() const;
};

struct RewardSpec {
  RewardMode mode = RewardMode::kChecklistOnly;
  RewardWeights weights{};
};

// Scores one sampled response through reward_core.
RewardBreakdown score_toy_response(const ToyEnvironment& env, const ToyQuery& query,
                                   const std::vector<std::size_t>& seq,
                                   const RewardSpec& spec);

struct TraceRow {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double checklist = 0.0;
  double truth = 0.0;
  double kl = 0.0;       // mean per-position KL(policy || reference)
  double entropy = 0.0;  // mean per-position entropy
  double response_len = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
};

nlohmann::ordered_json to_json(const TraceRow& row);

struct TrainResult {
  std::vector<TraceRow> trace;  // one row per step, measured before the update
  ToyPolicy policy;
};

// Reference policy = initial policy. Rows are averaged over all queries.
TrainResult train(const ToyEnvironment& env, const GRPOConfig& config,
                  const RewardSpec& spec);

}  // namespace factalign
