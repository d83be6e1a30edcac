#pragma once
// Rule-based judges for offline runs and tests. None of these is a model of
// factuality; they implement fixed conventions so that fixtures have exact,
// hand-checkable answers:
//
//   * a text "mentions" a fact when the fact's whitespace tokens appear as a
//     contiguous run in it; a run preceded by "NOT TRUE:" is a negated mention
//   * claims are sentences that contain no subjective-marker word
//   * truthfulness and general scores come from fixture tables

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "factalign/judge.hpp"

namespace factalign::reference {

// Sentence splitter (on . ! ? followed by whitespace or end of text) that
// drops sentences containing any subjective-marker word.
class Extractor final : public ClaimExtractor {
 public:
  std::vector<std::string> extract(std::string_view text) const override;
  std::size_t concurrency_limit() const override { return 4; }

  static const std::vector<std::string>& subjective_markers();
};

// REFUTE if any chunk has a negated mention of the claim, else SUPPORT if any
// chunk mentions it, else NOT_ENOUGH_INFO.
class Verifier final : public ClaimVerifier {
 public:
  Label verify(const Claim& claim,
               std::span<const std::string> evidence) const override;
  std::size_t concurrency_limit() const override { return 4; }
};

// Contradictory on a negated mention in the answer, Consistent on a mention,
// Missing otherwise.
class ChecklistVerifier final : public ChecklistJudge {
 public:
  ChecklistVerdicts classify(std::string_view query, std::string_view answer,
                             const Checklist& checklist) const override;
  std::size_t concurrency_limit() const override { return 4; }
};

// Looks the claim text up in a table. Unknown claims get `default_prob` when
// set and otherwise fail with MalformedJudgeOutput.
class TruthTable final : public TruthfulnessScorer {
 public:
  TruthTable(std::map<std::string, double, std::less<>> probs,
             std::optional<double> default_prob = std::nullopt);
  // JSON object {"probs": {claim: p, ...}, "default": p?}.
  static TruthTable from_file(const std::filesystem::path& path);

  double score(const Claim& claim) const override;
  std::size_t concurrency_limit() const override { return 4; }

 private:
  std::map<std::string, double, std::less<>> probs_;
  std::optional<double> default_;
};

// Scores keyed by (query, answer); unknown pairs get `default_score` when set
// and otherwise fail with JudgeUnavailable.
class GeneralTable final : public GeneralScorer {
 public:
  GeneralTable(std::map<std::pair<std::string, std::string>, double> scores,
               std::optional<double> default_score = std::nullopt);
  // JSON object {"scores": [{"query", "answer", "score"}...], "default": s?}.
  // `default_override`, when set, replaces the file's default.
  static GeneralTable from_file(const std::filesystem::path& path,
                                std::optional<double> default_override = std::nullopt);

  double score(std::string_view query, std::string_view answer) const override;
  std::size_t concurrency_limit() const override { return 4; }

 private:
  std::map<std::pair<std::string, std::string>, double> scores_;
  std::optional<double> default_;
};

// Keeps claims in order, dropping any whose normalized text was already seen.
class Curator final : public ChecklistCurator {
 public:
  std::vector<std::string> curate(std::string_view query,
                                  const std::vector<Claim>& claims) const override;
};

// Picks one of the canned answers for a query (by exact query text) using the
// seed. Unknown queries fail with JudgeUnavailable.
class CannedGenerator final : public ResponseGenerator {
 public:
  explicit CannedGenerator(std::map<std::string, std::vector<std::string>, std::less<>> answers);
  // JSON object {query: [answer, ...], ...}.
  static CannedGenerator from_file(const std::filesystem::path& path);

  std::string generate(std::string_view query, std::string_view fewshot_context,
                       std::uint64_t seed) const override;

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> answers_;
};

// Prefers the answer with more whitespace tokens; equal lengths tie.
class LengthPairJudge final : public PairwiseJudge {
 public:
  PairRanking rank(std::string_view instruction, std::string_view output_1,
                   std::string_view output_2) const override;
};

// Always ranks whatever sits in slot 1 first. Used to demonstrate that the
// two-trial protocol cancels position bias.
class PositionBiasedJudge final : public PairwiseJudge {
 public:
  PairRanking rank(std::string_view, std::string_view,
                   std::string_view) const override {
    return {1, 2};
  }
};

}  // namespace factalign::reference
