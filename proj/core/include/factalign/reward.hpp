#pragma once
// Reward formulas for factual alignment.
//
// Everything here is a pure function of pre-computed verdicts and
// probabilities; no judge is ever called from this header. All arithmetic is
// IEEE double.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace factalign {

// ---------------------------------------------------------------------------
// Structured responses: <think>T</think><answer>A</answer>

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

struct StructuredResponse {
  std::string raw_text;
  std::optional<std::string> think;
  std::optional<std::string> answer;
  bool format_valid = false;
};

// Total function. A response is valid iff, ignoring surrounding whitespace, it
// is exactly one think segment followed by one answer segment and no delimiter
// token occurs anywhere else. Invalid responses still carry a best-effort
// answer (the whole text when no answer delimiters are usable).
StructuredResponse parse_structured_response(std::string_view raw_text);

// ---------------------------------------------------------------------------
// Checklist verdicts

enum class Verdict { kConsistent, kContradictory, kMissing };

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct VerdictOutcome {
  std::size_t item_index = 0;
  Verdict verdict = Verdict::kMissing;
  std::string analysis;
};

struct VerdictCounts {
  std::size_t consistent = 0;
  std::size_t contradictory = 0;
  std::size_t missing = 0;

  std::size_t total() const { return consistent + contradictory + missing; }
};

struct ChecklistVerdicts {
  std::string query_id;
  std::vector<VerdictOutcome> outcomes;

  VerdictCounts counts() const;
  // Throws MalformedJudgeOutput unless item indices are a permutation of
  // 0..checklist_size-1.
  void validate(std::size_t checklist_size) const;
};

// ---------------------------------------------------------------------------
// Configuration

struct RewardWeights {
  double kappa = 0.25;   // recall
  double lambda = 0.25;  // precision
  double mu = 0.5;       // truthfulness
  double general_coef = 0.1;

  // Throws InvalidWeights unless each weight is in [0,1] and they sum to 1
  // within 1e-12.
  void validate() const;
};

enum class LengthUnit { kTokens, kCharacters, kWhitespaceWords };

std::string_view to_string(LengthUnit u);
std::optional<LengthUnit> length_unit_from_string(std::string_view s);

struct LengthPolicy {
  std::size_t max_length = 2048;       // L_m
  std::size_t critical_length = 1198;  // L_c, so L_m - L_c = 850
  LengthUnit unit = LengthUnit::kTokens;

  // Throws InvalidArgument unless 0 < L_c < L_m.
  void validate() const;
};

using LengthMeasure = std::function<std::size_t(std::string_view)>;

// Built-in measures. kTokens uses a tokenizer-free approximation (word runs
// and individual punctuation marks); plug a model tokenizer for exact counts.
LengthMeasure default_length_measure(LengthUnit unit);

enum class RewardMode { kChecklistOnly, kTruthOnly, kBoth };

std::string_view to_string(RewardMode m);
std::optional<RewardMode> reward_mode_from_string(std::string_view s);

// ---------------------------------------------------------------------------
// Component rewards

double compute_recall(const VerdictCounts& counts);
double compute_recall(const ChecklistVerdicts& verdicts);
double compute_precision(const VerdictCounts& counts);
double compute_precision(const ChecklistVerdicts& verdicts);
double compute_checklist_reward(double recall, double precision);
double compute_truth_reward(std::span<const double> probabilities);
double compute_truth_variant(std::span<const double> missing_claim_probs);
double compute_format_reward(const StructuredResponse& resp);
double compute_length_penalty(std::size_t answer_length,
                              const LengthPolicy& policy);
double compute_fact_reward(double recall, double precision, double truth,
                           const RewardWeights& w);

// Inputs to combine(); a mode only needs the components its branch names.
// For kBoth, `fact` is used directly when set, else derived from
// recall/precision/truth.
struct RewardComponents {
  std::optional<double> checklist;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> truth;
  std::optional<double> fact;
  std::optional<double> general;
  std::optional<double> length_penalty;
  std::optional<double> format;
};

// Throws MissingComponent when the selected branch references an unset
// component, InvalidWeights for kBoth with bad weights.
double combine(const RewardComponents& c, RewardMode mode,
               const RewardWeights& w);

// ---------------------------------------------------------------------------
// Full breakdown for one response

struct RewardBreakdown {
  double recall = 0.0;
  double precision = 0.0;
  double checklist = 0.0;
  double truth = 0.0;
  double truth_variant = 0.0;
  double general = 0.0;
  double format = 0.0;
  double length_penalty = 0.0;
  double fact = 0.0;
  double total = 0.0;
  RewardMode mode = RewardMode::kBoth;
  // When set, truth_variant stands in for truth wherever truth is combined.
  bool truth_variant_used = false;

  // Recomputes the combined scalar from the stored fields.
  double recombine(const RewardWeights& w) const;
};

struct RewardInputs {
  const StructuredResponse* response = nullptr;
  std::optional<ChecklistVerdicts> verdicts;
  std::optional<std::vector<double>> truth_probs;
  // Probabilities of answer claims the checklist pseudo-response marks Missing.
  std::optional<std::vector<double>> missing_claim_probs;
  std::optional<double> general;
  std::size_t answer_length = 0;
};

RewardBreakdown compute_breakdown(const RewardInputs& in, RewardMode mode,
                                  const RewardWeights& w,
                                  const LengthPolicy& policy,
                                  bool use_truth_variant = false);

}  // namespace factalign
