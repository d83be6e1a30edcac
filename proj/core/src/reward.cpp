#include "factalign/reward.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <numeric>

#include "factalign/error.hpp"

namespace factalign {

namespace {

constexpr double kWeightTolerance = 1e-12;

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool contains_delimiter(std::string_view s) {
  static constexpr std::array<std::string_view, 4> kDelims = {
      kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose};
  for (auto d : kDelims) {
    if (s.find(d) != std::string_view::npos) return true;
  }
  return false;
}

// Strict grammar: ws <think> T </think> ws <answer> A </answer> ws, where T
// and A contain no delimiter token.
bool parse_strict(std::string_view text, std::string& think,
                  std::string& answer) {
  auto s = trim(text);
  if (!s.starts_with(kThinkOpen)) return false;
  s.remove_prefix(kThinkOpen.size());
  auto close = s.find(kThinkClose);
  if (close == std::string_view::npos) return false;
  auto t = s.substr(0, close);
  s.remove_prefix(close + kThinkClose.size());
  s = trim(s);
  if (!s.starts_with(kAnswerOpen)) return false;
  s.remove_prefix(kAnswerOpen.size());
  if (!s.ends_with(kAnswerClose)) return false;
  auto a = s.substr(0, s.size() - kAnswerClose.size());
  if (contains_delimiter(t) || contains_delimiter(a)) return false;
  think.assign(t);
  answer.assign(a);
  return true;
}

std::string best_effort_answer(std::string_view text) {
  auto open = text.find(kAnswerOpen);
  if (open == std::string_view::npos) return std::string(text);
  auto rest = text.substr(open + kAnswerOpen.size());
  auto close = rest.find(kAnswerClose);
  return std::string(close == std::string_view::npos ? rest
                                                     : rest.substr(0, close));
}

double mean(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Shared tail of every combination branch so that combine() and
// RewardBreakdown::recombine() round identically.
double add_auxiliary(double main, double general, double length_penalty,
                     double format, const RewardWeights& w) {
  return main + w.general_coef * general + length_penalty + format;
}

}  // namespace

StructuredResponse parse_structured_response(std::string_view raw_text) {
  StructuredResponse out;
  out.raw_text.assign(raw_text);
  std::string think, answer;
  if (parse_strict(raw_text, think, answer)) {
    out.think = std::move(think);
    out.answer = std::move(answer);
    out.format_valid = true;
    return out;
  }
  out.answer = best_effort_answer(raw_text);
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kConsistent: return "Consistent";
    case Verdict::kContradictory: return "Contradictory";
    case Verdict::kMissing: return "Missing";
  }
  return "Missing";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "Consistent") return Verdict::kConsistent;
  if (s == "Contradictory") return Verdict::kContradictory;
  if (s == "Missing") return Verdict::kMissing;
  return std::nullopt;
}

VerdictCounts ChecklistVerdicts::counts() const {
  VerdictCounts c;
  for (const auto& o : outcomes) {
    switch (o.verdict) {
      case Verdict::kConsistent: ++c.consistent; break;
      case Verdict::kContradictory: ++c.contradictory; break;
      case Verdict::kMissing: ++c.missing; break;
    }
  }
  return c;
}

void ChecklistVerdicts::validate(std::size_t checklist_size) const {
  if (outcomes.size() != checklist_size) {
    throw Error(ErrorCode::kMalformedJudgeOutput,
                "expected " + std::to_string(checklist_size) +
                    " verdicts, got " + std::to_string(outcomes.size()),
                query_id);
  }
  std::vector<bool> seen(checklist_size, false);
  for (const auto& o : outcomes) {
    if (o.item_index >= checklist_size || seen[o.item_index]) {
      throw Error(ErrorCode::kMalformedJudgeOutput,
                  "verdict item indices are not a permutation", query_id);
    }
    seen[o.item_index] = true;
  }
}

void RewardWeights::validate() const {
  for (double v : {kappa, lambda, mu}) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::kInvalidWeights, "weights must lie in [0,1]");
    }
  }
  if (!std::isfinite(general_coef)) {
    throw Error(ErrorCode::kInvalidWeights, "general_coef must be finite");
  }
  if (std::abs(kappa + lambda + mu - 1.0) > kWeightTolerance) {
    throw Error(ErrorCode::kInvalidWeights, "kappa + lambda + mu must equal 1");
  }
}

std::string_view to_string(LengthUnit u) {
  switch (u) {
    case LengthUnit::kTokens: return "tokens";
    case LengthUnit::kCharacters: return "characters";
    case LengthUnit::kWhitespaceWords: return "whitespace_words";
  }
  return "tokens";
}

std::optional<LengthUnit> length_unit_from_string(std::string_view s) {
  if (s == "tokens") return LengthUnit::kTokens;
  if (s == "characters") return LengthUnit::kCharacters;
  if (s == "whitespace_words") return LengthUnit::kWhitespaceWords;
  return std::nullopt;
}

void LengthPolicy::validate() const {
  if (critical_length == 0 || critical_length >= max_length) {
    throw Error(ErrorCode::kInvalidArgument,
                "length policy requires 0 < critical_length < max_length");
  }
}

LengthMeasure default_length_measure(LengthUnit unit) {
  switch (unit) {
    case LengthUnit::kCharacters:
      return [](std::string_view s) {
        std::size_t n = 0;
        for (char c : s) {
          // count UTF-8 lead bytes only
          if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
        }
        return n;
      };
    case LengthUnit::kWhitespaceWords:
      return [](std::string_view s) {
        std::size_t n = 0;
        bool in_word = false;
        for (char c : s) {
          if (is_space(c)) {
            in_word = false;
          } else if (!in_word) {
            in_word = true;
            ++n;
          }
        }
        return n;
      };
    case LengthUnit::kTokens:
      return [](std::string_view s) {
        std::size_t n = 0;
        bool in_word = false;
        for (char c : s) {
          auto u = static_cast<unsigned char>(c);
          if (std::isalnum(u) || u >= 0x80) {
            if (!in_word) ++n;
            in_word = true;
          } else {
            in_word = false;
            if (!is_space(c)) ++n;
          }
        }
        return n;
      };
  }
  return {};
}

std::string_view to_string(RewardMode m) {
  switch (m) {
    case RewardMode::kChecklistOnly: return "checklist";
    case RewardMode::kTruthOnly: return "truth";
    case RewardMode::kBoth: return "both";
  }
  return "both";
}

std::optional<RewardMode> reward_mode_from_string(std::string_view s) {
  if (s == "checklist") return RewardMode::kChecklistOnly;
  if (s == "truth") return RewardMode::kTruthOnly;
  if (s == "both") return RewardMode::kBoth;
  return std::nullopt;
}

double compute_recall(const VerdictCounts& c) {
  if (c.total() == 0) {
    throw Error(ErrorCode::kEmptyChecklist, "no checklist verdicts");
  }
  return static_cast<double>(c.consistent) / static_cast<double>(c.total());
}

double compute_recall(const ChecklistVerdicts& v) {
  try {
    return compute_recall(v.counts());
  } catch (const Error& e) {
    throw e.with_context(v.query_id);
  }
}

double compute_precision(const VerdictCounts& c) {
  if (c.total() == 0) {
    throw Error(ErrorCode::kEmptyChecklist, "no checklist verdicts");
  }
  const auto denom = c.consistent + c.contradictory;
  // All-Missing: nothing asserted, nothing rewarded.
  if (denom == 0) return 0.0;
  return static_cast<double>(c.consistent) / static_cast<double>(denom);
}

double compute_precision(const ChecklistVerdicts& v) {
  try {
    return compute_precision(v.counts());
  } catch (const Error& e) {
    throw e.with_context(v.query_id);
  }
}

double compute_checklist_reward(double recall, double precision) {
  return (1.0 / 3.0) * recall + (2.0 / 3.0) * precision;
}

double compute_truth_reward(std::span<const double> probabilities) {
  if (probabilities.empty()) return 0.0;
  return mean(probabilities);
}

double compute_truth_variant(std::span<const double> missing_claim_probs) {
  if (missing_claim_probs.empty()) return 0.0;
  return mean(missing_claim_probs);
}

double compute_format_reward(const StructuredResponse& resp) {
  return resp.format_valid ? 0.0 : -1.0;
}

double compute_length_penalty(std::size_t answer_length,
                              const LengthPolicy& policy) {
  policy.validate();
  const auto free_length = policy.max_length - policy.critical_length;
  if (answer_length <= free_length) return 0.0;
  if (answer_length > policy.max_length) return -1.0;
  return (static_cast<double>(free_length) -
          static_cast<double>(answer_length)) /
         static_cast<double>(policy.critical_length);
}

namespace {

// Neumaier-compensated sum, so the weighted terms add up to the correctly
// rounded result regardless of order.
double compensated_sum(std::initializer_list<double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

double compute_fact_reward(double recall, double precision, double truth,
                           const RewardWeights& w) {
  w.validate();
  return compensated_sum({w.kappa * recall, w.lambda * precision, w.mu * truth});
}

namespace {

double require(const std::optional<double>& v, const char* name) {
  if (!v) {
    throw Error(ErrorCode::kMissingComponent,
                std::string("component '") + name + "' was not computed");
  }
  return *v;
}

}  // namespace

double combine(const RewardComponents& c, RewardMode mode,
               const RewardWeights& w) {
  double main = 0.0;
  switch (mode) {
    case RewardMode::kChecklistOnly:
      if (c.checklist) {
        main = *c.checklist;
      } else {
        main = compute_checklist_reward(require(c.recall, "recall"),
                                        require(c.precision, "precision"));
      }
      break;
    case RewardMode::kTruthOnly:
      main = require(c.truth, "truth");
      break;
    case RewardMode::kBoth:
      if (c.fact) {
        main = *c.fact;
      } else {
        main = compute_fact_reward(require(c.recall, "recall"),
                                   require(c.precision, "precision"),
                                   require(c.truth, "truth"), w);
      }
      break;
  }
  return add_auxiliary(main, require(c.general, "general"),
                       require(c.length_penalty, "length_penalty"),
                       require(c.format, "format"), w);
}

double RewardBreakdown::recombine(const RewardWeights& w) const {
  const double t = truth_variant_used ? truth_variant : truth;
  double main = 0.0;
  switch (mode) {
    case RewardMode::kChecklistOnly: main = checklist; break;
    case RewardMode::kTruthOnly: main = t; break;
    case RewardMode::kBoth:
      main = compute_fact_reward(recall, precision, t, w);
      break;
  }
  return add_auxiliary(main, general, length_penalty, format, w);
}

RewardBreakdown compute_breakdown(const RewardInputs& in, RewardMode mode,
                                  const RewardWeights& w,
                                  const LengthPolicy& policy,
                                  bool use_truth_variant) {
  if (in.response == nullptr) {
    throw Error(ErrorCode::kMissingComponent, "no parsed response");
  }
  RewardBreakdown b;
  b.mode = mode;
  b.truth_variant_used = use_truth_variant;

  RewardComponents c;
  b.format = compute_format_reward(*in.response);
  b.length_penalty = compute_length_penalty(in.answer_length, policy);
  c.format = b.format;
  c.length_penalty = b.length_penalty;
  if (in.general) {
    b.general = *in.general;
    c.general = b.general;
  }

  if (in.verdicts) {
    const auto counts = in.verdicts->counts();
    try {
      b.recall = compute_recall(counts);
      b.precision = compute_precision(counts);
    } catch (const Error& e) {
      throw e.with_context(in.verdicts->query_id);
    }
    b.checklist = compute_checklist_reward(b.recall, b.precision);
    c.recall = b.recall;
    c.precision = b.precision;
    c.checklist = b.checklist;
  }
  if (in.truth_probs) {
    b.truth = compute_truth_reward(*in.truth_probs);
    if (!use_truth_variant) c.truth = b.truth;
  }
  if (in.missing_claim_probs) {
    b.truth_variant = compute_truth_variant(*in.missing_claim_probs);
    if (use_truth_variant) c.truth = b.truth_variant;
  }
  if (mode == RewardMode::kBoth) {
    b.fact = compute_fact_reward(require(c.recall, "recall"),
                                 require(c.precision, "precision"),
                                 require(c.truth, "truth"), w);
  }
  b.total = combine(c, mode, w);
  return b;
}

}  // namespace factalign
