#include "factalign/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "factalign/concurrency.hpp"
#include "factalign/error.hpp"
#include "factalign/rng.hpp"
#include "factalign/text.hpp"

namespace factalign {

std::string_view to_string(QuerySource s) {
  switch (s) {
    case QuerySource::kEli5: return "ELI5";
    case QuerySource::kLongFactGen: return "LongFactGen";
    case QuerySource::kLongWikiGen: return "LongWikiGen";
    case QuerySource::kCustom: return "Custom";
  }
  return "Custom";
}

std::optional<QuerySource> query_source_from_string(std::string_view s) {
  for (auto v : {QuerySource::kEli5, QuerySource::kLongFactGen, QuerySource::kLongWikiGen,
                 QuerySource::kCustom}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

namespace {

// Unwraps outcomes in order, attaching `id_of(i)` to the first failure.
template <typename T, typename IdOf>
std::vector<T> collect(std::vector<Outcome<T>>& outcomes, IdOf id_of) {
  std::vector<T> out;
  out.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) throw outcomes[i].error->with_context(id_of(i));
    out.push_back(std::move(*outcomes[i].value));
  }
  return out;
}

}  // namespace

std::vector<ResponseRecord> sample_responses(const ResponseGenerator& generator,
                                             const std::vector<QueryRecord>& queries,
                                             std::size_t samples_per_query,
                                             std::uint64_t seed,
                                             const std::string& default_fewshot) {
  if (samples_per_query == 0) {
    throw Error(ErrorCode::kInvalidArgument, "samples_per_query must be >= 1");
  }
  const std::size_t n = queries.size() * samples_per_query;
  auto outcomes = parallel_map(n, generator.concurrency_limit(), [&](std::size_t i) {
    const auto& q = queries[i / samples_per_query];
    const std::string rid = q.id + "#" + std::to_string(i % samples_per_query);
    const auto& fewshot = q.fewshot_context ? *q.fewshot_context : default_fewshot;
    return ResponseRecord{q.id, rid,
                          generator.generate(q.text, fewshot, text::stable_hash(rid, seed))};
  });
  return collect(outcomes, [&](std::size_t i) { return queries[i / samples_per_query].id; });
}

std::vector<Claim> extract_stage(const ClaimExtractor& extractor,
                                 const std::vector<ResponseRecord>& responses) {
  auto outcomes = parallel_map(responses.size(), extractor.concurrency_limit(),
                               [&](std::size_t i) {
                                 return extract_claims(extractor, responses[i].text,
                                                       responses[i].response_id);
                               });
  auto per_response =
      collect(outcomes, [&](std::size_t i) { return responses[i].response_id; });
  std::vector<Claim> out;
  for (auto& claims : per_response) {
    for (auto& c : claims) out.push_back(std::move(c));
  }
  return out;
}

std::vector<Claim> verify_corpus(const std::vector<Claim>& claims,
                                 const RetrievalIndex& index,
                                 const ClaimVerifier& verifier) {
  auto outcomes = parallel_map(claims.size(), verifier.concurrency_limit(),
                               [&](std::size_t i) {
                                 std::vector<std::string> evidence;
                                 for (const auto& hit : index.retrieve(claims[i].text)) {
                                   evidence.push_back(hit.chunk->text);
                                 }
                                 Claim c = claims[i];
                                 c.label = verify_claim(verifier, c, evidence);
                                 return c;
                               });
  return collect(outcomes, [&](std::size_t i) { return claims[i].id; });
}

Checklist build_checklist(const QueryRecord& query,
                          const std::vector<Claim>& supported_claims,
                          const ChecklistCurator& curator) {
  for (const auto& c : supported_claims) {
    if (c.label != Label::kSupport) {
      throw Error(ErrorCode::kInvalidArgument, "checklist input is not SUPPORT", c.id);
    }
  }
  Checklist out;
  out.query_id = query.id;
  if (supported_claims.empty()) return out;

  std::vector<std::string> curated;
  try {
    curated = curator.curate(query.text, supported_claims);
  } catch (const Error& e) {
    throw e.with_context(query.id);
  }

  std::map<std::string, std::string> source_of;
  for (const auto& c : supported_claims) source_of.emplace(text::normalize(c.text), c.id);

  std::set<std::string> seen;
  for (auto& item : curated) {
    auto key = text::normalize(item);
    if (key.empty() || !seen.insert(key).second) continue;
    auto it = source_of.find(key);
    out.items.emplace_back(text::trim(item));
    out.sources.push_back(it == source_of.end() ? "" : it->second);
  }
  return out;
}

std::vector<Checklist> build_checklists(const std::vector<QueryRecord>& queries,
                                        const std::vector<ResponseRecord>& responses,
                                        const std::vector<Claim>& labeled_claims,
                                        const ChecklistCurator& curator) {
  std::map<std::string, std::string> query_of_response;
  for (const auto& r : responses) query_of_response.emplace(r.response_id, r.query_id);

  std::map<std::string, std::vector<Claim>> supported;
  for (const auto& c : labeled_claims) {
    if (c.label != Label::kSupport) continue;
    auto it = query_of_response.find(c.source_response_id);
    if (it != query_of_response.end()) supported[it->second].push_back(c);
  }

  auto outcomes = parallel_map(queries.size(), curator.concurrency_limit(),
                               [&](std::size_t i) {
                                 auto it = supported.find(queries[i].id);
                                 static const std::vector<Claim> kNone;
                                 return build_checklist(
                                     queries[i], it == supported.end() ? kNone : it->second,
                                     curator);
                               });
  return collect(outcomes, [&](std::size_t i) { return queries[i].id; });
}

RMDataset assemble_rm_dataset(const std::vector<Claim>& labeled_claims,
                              const RMDataOptions& options) {
  if (options.negative_duplication == 0 || options.positives_per_negative == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "negative_duplication and positives_per_negative must be >= 1");
  }
  std::vector<const Claim*> pos;
  std::vector<const Claim*> neg;
  for (const auto& c : labeled_claims) {
    if (c.label == Label::kSupport) pos.push_back(&c);
    if (c.label == Label::kRefute) neg.push_back(&c);
  }
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorCode::kInsufficientClasses,
                "need at least one SUPPORT and one REFUTE claim (have " +
                    std::to_string(pos.size()) + " and " + std::to_string(neg.size()) + ")");
  }

  RMDataset ds;
  Rng rng(options.seed);
  for (const Claim* c : neg) {
    for (std::size_t d = 0; d < options.negative_duplication; ++d) {
      ds.examples.push_back({c->id, c->text, false, Label::kRefute, d});
    }
  }
  ds.negatives = ds.examples.size();

  const std::size_t target = options.positives_per_negative * ds.negatives;
  std::vector<std::size_t> keep;
  if (pos.size() >= target) {
    keep = rng.sample_indices(pos.size(), target);
    std::sort(keep.begin(), keep.end());
  } else {
    keep.resize(pos.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    ds.warning = "only " + std::to_string(pos.size()) + " positives for " +
                 std::to_string(ds.negatives) + " negatives; target was " +
                 std::to_string(target);
  }
  for (auto i : keep) ds.examples.push_back({pos[i]->id, pos[i]->text, true, Label::kSupport, 0});
  ds.positives = keep.size();

  rng.shuffle(ds.examples);
  return ds;
}

}  // namespace factalign
