#pragma once
// Offline data preparation: sample base-model answers, extract claims, verify
// them against a local index, curate per-query checklists and assemble the
// truthfulness-model training set.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "factalign/claims.hpp"
#include "factalign/judge.hpp"
#include "factalign/retrieval.hpp"

namespace factalign {

enum class QuerySource { kEli5, kLongFactGen, kLongWikiGen, kCustom };

std::string_view to_string(QuerySource s);
std::optional<QuerySource> query_source_from_string(std::string_view s);

struct QueryRecord {
  std::string id;
  std::string text;
  QuerySource source = QuerySource::kCustom;
  std::optional<std::string> fewshot_context;
};

struct ResponseRecord {
  std::string query_id;
  std::string response_id;
  std::string text;
};

// One truthfulness-model training example. `label` is true iff origin is
// SUPPORT; negatives appear once per duplicate_index.
struct RMExample {
  std::string claim_id;
  std::string claim_text;
  bool label = false;
  Label origin = Label::kRefute;
  std::size_t duplicate_index = 0;
};

struct RMDataset {
  std::vector<RMExample> examples;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // Set when too few positives existed to reach the target ratio.
  std::optional<std::string> warning;
};

// samples_per_query answers per query, ids "<query_id>#<k>", grouped by query
// in input order. Generator failures carry the query id.
std::vector<ResponseRecord> sample_responses(const ResponseGenerator& generator,
                                             const std::vector<QueryRecord>& queries,
                                             std::size_t samples_per_query,
                                             std::uint64_t seed,
                                             const std::string& default_fewshot = "");

// Claims of every response, in response order.
std::vector<Claim> extract_stage(const ClaimExtractor& extractor,
                                 const std::vector<ResponseRecord>& responses);

// Labels every claim using the top_k chunks retrieved for it.
std::vector<Claim> verify_corpus(const std::vector<Claim>& claims,
                                 const RetrievalIndex& index,
                                 const ClaimVerifier& verifier);

// Curates SUPPORT claims of one query. No claims gives an empty checklist
// without calling the curator. Items that normalize (case, whitespace) to an
// earlier item are dropped.
Checklist build_checklist(const QueryRecord& query,
                          const std::vector<Claim>& supported_claims,
                          const ChecklistCurator& curator);

// build_checklist for every query, using the SUPPORT claims of its responses.
std::vector<Checklist> build_checklists(const std::vector<QueryRecord>& queries,
                                        const std::vector<ResponseRecord>& responses,
                                        const std::vector<Claim>& labeled_claims,
                                        const ChecklistCurator& curator);

struct RMDataOptions {
  std::size_t negative_duplication = 3;
  std::size_t positives_per_negative = 2;
  std::uint64_t seed = 0;
};

// Negatives (REFUTE) are repeated negative_duplication times; positives
// (SUPPORT) are downsampled without replacement to positives_per_negative
// times the duplicated negative count, or all kept with a warning when there
// are too few. NOT_ENOUGH_INFO and unlabeled claims are ignored. The result
// is shuffled by seed. Throws InsufficientClasses if either class is empty.
RMDataset assemble_rm_dataset(const std::vector<Claim>& labeled_claims,
                              const RMDataOptions& options = {});

}  // namespace factalign
