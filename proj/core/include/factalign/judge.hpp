#pragma once
// Judge roles. Every LLM-backed step of the pipeline talks to one of these
// interfaces; ChatJudge (remote.hpp) implements all of them over a
// chat-completions backend and the reference judges (reference_judges.hpp)
// implement them with fixed rules for offline runs.
//
// Implementations must be safe to call concurrently. concurrency_limit() is
// the number of in-flight calls a batch caller may issue.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factalign/claims.hpp"
#include "factalign/reward.hpp"

namespace factalign {

class ClaimExtractor {
 public:
  virtual ~ClaimExtractor() = default;
  // Claim texts in reply order; an empty vector means "no verifiable claims".
  virtual std::vector<std::string> extract(std::string_view text) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

class ClaimVerifier {
 public:
  virtual ~ClaimVerifier() = default;
  virtual Label verify(const Claim& claim,
                       std::span<const std::string> evidence) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

class ChecklistJudge {
 public:
  virtual ~ChecklistJudge() = default;
  virtual ChecklistVerdicts classify(std::string_view query,
                                     std::string_view answer,
                                     const Checklist& checklist) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

class TruthfulnessScorer {
 public:
  virtual ~TruthfulnessScorer() = default;
  // P(claim is true), in [0,1].
  virtual double score(const Claim& claim) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

class GeneralScorer {
 public:
  virtual ~GeneralScorer() = default;
  virtual double score(std::string_view query, std::string_view answer) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

class ChecklistCurator {
 public:
  virtual ~ChecklistCurator() = default;
  virtual std::vector<std::string> curate(
      std::string_view query, const std::vector<Claim>& claims) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

class ResponseGenerator {
 public:
  virtual ~ResponseGenerator() = default;
  virtual std::string generate(std::string_view query,
                               std::string_view fewshot_context,
                               std::uint64_t seed) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

// Ranks reported by a pairwise judge for the answers in slot 1 and slot 2.
struct PairRanking {
  int rank_1 = 1;
  int rank_2 = 2;
};

class PairwiseJudge {
 public:
  virtual ~PairwiseJudge() = default;
  virtual PairRanking rank(std::string_view instruction,
                           std::string_view output_1,
                           std::string_view output_2) const = 0;
  virtual std::size_t concurrency_limit() const { return 1; }
};

// ---------------------------------------------------------------------------
// Role-level operations

// Claims with ids "<source_response_id>:c<j>". Throws InvalidArgument on empty
// text.
std::vector<Claim> extract_claims(const ClaimExtractor& extractor,
                                  std::string_view text,
                                  const std::string& source_response_id = "");

Label verify_claim(const ClaimVerifier& verifier, const Claim& claim,
                   std::span<const std::string> evidence);

// Throws EmptyChecklist on an empty checklist; the judge's output is checked
// against the ChecklistVerdicts invariants.
ChecklistVerdicts classify_checklist(const ChecklistJudge& judge,
                                     std::string_view query,
                                     std::string_view answer,
                                     const Checklist& checklist);

double score_truthfulness(const TruthfulnessScorer& scorer, const Claim& claim);

double score_general(const GeneralScorer& scorer, std::string_view query,
                     std::string_view answer);

// ---------------------------------------------------------------------------
// Reply grammars. Each parser strips surrounding whitespace and an optional
// ``` fence, then either returns a value or throws MalformedJudgeOutput.

inline constexpr std::string_view kNoClaimsReply = "no verifiable objective claims";

// "* claim" per line, or the literal no-claims reply.
std::vector<std::string> parse_claim_list(std::string_view reply);

// {"conclusion": "SUPPORT" | "REFUTE" | "NOT ENOUGH INFO"}; the value may be
// wrapped in ** as in the prompt's own wording.
Label parse_verification(std::string_view reply);

// JSON list of {"analysis": str, "conclusion": "Consistent"|...}, exactly
// `expected_items` long, in checklist order.
std::vector<VerdictOutcome> parse_checklist_verdicts(std::string_view reply,
                                                     std::size_t expected_items);

// "True" -> 1.0, "False" -> 0.0.
double parse_truth_label(std::string_view reply);

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

// p(True) / (p(True) + p(False)) over the first generated token's candidates.
double truth_from_logprobs(std::span<const TokenLogprob> top_logprobs);

// Items of a \boxed{...} block, one per non-empty line.
std::vector<std::string> parse_boxed_list(std::string_view reply);

// [{'model': 'model_1', 'rank': r}, {'model': 'model_2', 'rank': r}] with
// either quote style.
PairRanking parse_rank_list(std::string_view reply);

}  // namespace factalign
