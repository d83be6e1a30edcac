#pragma once

#include <memory>

#include "factalign/chat.hpp"
#include "factalign/concurrency.hpp"
#include "factalign/judge.hpp"
#include "factalign/prompts.hpp"

namespace factalign {

// Every judge role, implemented by rendering the matching prompt template and
// parsing the reply. A call is attempted 1 + max_retries times; transport
// failures and unparsable replies both trigger a retry (exponential backoff),
// the first parseable reply wins, and the last error propagates once retries
// are exhausted.
class ChatJudge final : public ClaimExtractor,
                        public ClaimVerifier,
                        public ChecklistJudge,
                        public TruthfulnessScorer,
                        public ChecklistCurator,
                        public ResponseGenerator,
                        public PairwiseJudge {
 public:
  ChatJudge(std::shared_ptr<ChatBackend> backend, JudgeConfig config,
            TemplateSet templates = TemplateSet::builtin());

  std::vector<std::string> extract(std::string_view text) const override;
  Label verify(const Claim& claim,
               std::span<const std::string> evidence) const override;
  ChecklistVerdicts classify(std::string_view query, std::string_view answer,
                             const Checklist& checklist) const override;
  double score(const Claim& claim) const override;
  std::vector<std::string> curate(std::string_view query,
                                  const std::vector<Claim>& claims) const override;
  std::string generate(std::string_view query, std::string_view fewshot_context,
                       std::uint64_t seed) const override;
  PairRanking rank(std::string_view instruction, std::string_view output_1,
                   std::string_view output_2) const override;

  std::size_t concurrency_limit() const override { return config_.concurrency_limit; }
  const JudgeConfig& config() const { return config_; }
  // Highest number of simultaneous backend calls observed so far.
  std::size_t peak_in_flight() const { return limiter_->peak(); }

 private:
  template <typename Parse>
  auto ask(std::string_view template_name, const Bindings& bindings,
           bool logprobs, std::optional<std::uint64_t> seed, Parse parse) const;

  std::shared_ptr<ChatBackend> backend_;
  JudgeConfig config_;
  TemplateSet templates_;
  std::shared_ptr<Limiter> limiter_;
};

// Scalar reward from an HTTP scoring service: POST {"query", "answer"} to
// `endpoint`, reply {"score": number}. Retries like ChatJudge.
class HttpGeneralScorer final : public GeneralScorer {
 public:
  explicit HttpGeneralScorer(JudgeConfig config);
  double score(std::string_view query, std::string_view answer) const override;
  std::size_t concurrency_limit() const override { return config_.concurrency_limit; }

 private:
  JudgeConfig config_;
  std::shared_ptr<Limiter> limiter_;
};

// Formatting of list-valued prompt slots.
std::string format_evidence(std::span<const std::string> evidence);
std::string format_fact_list(const std::vector<std::string>& items);
std::string format_candidate_claims(const std::vector<Claim>& claims);

}  // namespace factalign
