#include "factalign/eval.hpp"

#include <algorithm>

#include "factalign/concurrency.hpp"
#include "factalign/error.hpp"
#include "factalign/pipeline.hpp"
#include "factalign/text.hpp"

namespace factalign {

using nlohmann::json;
using nlohmann::ordered_json;

double precision(const FactCounts& c) {
  const std::size_t total = c.supported + c.not_supported;
  if (total == 0) throw Error(ErrorCode::kNoFacts, "response has no facts");
  return static_cast<double>(c.supported) / static_cast<double>(total);
}

double recall_at_k(std::size_t supported, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  return std::min(static_cast<double>(supported) / static_cast<double>(k), 1.0);
}

double f1_at_k(const FactCounts& c, std::size_t k) {
  const double r = recall_at_k(c.supported, k);
  if (c.supported == 0) return 0.0;
  const double p = precision(c);
  return 2.0 * p * r / (p + r);
}

double win_rate(const std::vector<PairJudgment>& judgments) {
  if (judgments.empty()) throw Error(ErrorCode::kEmptyJudgments, "no judgments");
  double sum = 0.0;
  for (const auto& j : judgments) sum += (j.win_trial_1 + j.win_trial_2) / 2.0;
  return sum / static_cast<double>(judgments.size());
}

namespace {

// Score of the answer in `slot` (1 or 2).
double slot_score(const PairRanking& r, int slot) {
  if (r.rank_1 == r.rank_2) return 0.5;
  const bool first_wins = r.rank_1 < r.rank_2;
  return (slot == 1) == first_wins ? 1.0 : 0.0;
}

}  // namespace

PairJudgment judge_pair(const PairwiseJudge& judge, std::string_view instruction,
                        std::string_view answer_a, std::string_view answer_b,
                        std::string instance_id) {
  PairJudgment out;
  out.instance_id = std::move(instance_id);
  try {
    out.win_trial_1 = slot_score(judge.rank(instruction, answer_a, answer_b), 2);
    out.win_trial_2 = slot_score(judge.rank(instruction, answer_b, answer_a), 1);
  } catch (const Error& e) {
    throw e.with_context(out.instance_id);
  }
  return out;
}

BenchmarkReport run_benchmark(const std::vector<BenchmarkInstance>& instances,
                              const RetrievalIndex& index, const ClaimExtractor& extractor,
                              const ClaimVerifier& verifier, std::size_t k) {
  if (instances.empty()) throw Error(ErrorCode::kInvalidArgument, "no benchmark instances");
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");

  auto outcomes = parallel_map(instances.size(), extractor.concurrency_limit(),
                               [&](std::size_t i) {
                                 const auto& inst = instances[i];
                                 BenchmarkRow row;
                                 row.instance_id = inst.instance_id;
                                 if (!text::trim(inst.answer).empty()) {
                                   row.claims = verify_corpus(
                                       extract_claims(extractor, inst.answer, inst.instance_id),
                                       index, verifier);
                                 }
                                 for (const auto& c : row.claims) {
                                   if (c.label == Label::kSupport) {
                                     ++row.counts.supported;
                                   } else {
                                     ++row.counts.not_supported;
                                   }
                                 }
                                 row.no_facts = row.claims.empty();
                                 row.precision = row.no_facts ? 0.0 : precision(row.counts);
                                 row.recall_at_k = recall_at_k(row.counts.supported, k);
                                 row.f1_at_k = f1_at_k(row.counts, k);
                                 return row;
                               });

  BenchmarkReport report;
  report.k = k;
  report.n = instances.size();
  std::size_t s_total = 0, all_total = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok()) throw outcomes[i].error->with_context(instances[i].instance_id);
    auto& row = *outcomes[i].value;
    report.precision_mean += row.precision;
    report.recall_at_k_mean += row.recall_at_k;
    report.f1_at_k_mean += row.f1_at_k;
    s_total += row.counts.supported;
    all_total += row.counts.supported + row.counts.not_supported;
    if (row.no_facts) report.flags.push_back("no_facts:" + row.instance_id);
    report.rows.push_back(std::move(row));
  }
  const double n = static_cast<double>(report.n);
  report.precision_mean /= n;
  report.recall_at_k_mean /= n;
  report.f1_at_k_mean /= n;
  if (all_total > 0) {
    report.precision_micro = static_cast<double>(s_total) / static_cast<double>(all_total);
  }
  return report;
}

WinRateReport run_win_rate(const std::vector<PairInstance>& pairs, const PairwiseJudge& judge) {
  auto judgments = parallel_map_or_throw(pairs.size(), judge.concurrency_limit(),
                                         [&](std::size_t i) {
                                           const auto& p = pairs[i];
                                           return judge_pair(judge, p.instruction, p.answer_a,
                                                             p.answer_b, p.instance_id);
                                         });
  WinRateReport r;
  r.n = judgments.size();
  r.win_rate = win_rate(judgments);
  for (const auto& j : judgments) {
    r.ties += (j.win_trial_1 == 0.5) + (j.win_trial_2 == 0.5);
  }
  r.judgments = std::move(judgments);
  return r;
}

namespace {

std::string string_field(const json& j, const char* name) {
  if (!j.contains(name) || !j[name].is_string()) {
    throw Error(ErrorCode::kIo, std::string("missing string field '") + name + "'");
  }
  return j[name].get<std::string>();
}

}  // namespace

BenchmarkInstance benchmark_instance_from_json(const json& j) {
  return {string_field(j, "instance_id"), string_field(j, "instruction"),
          string_field(j, "answer")};
}

PairInstance pair_instance_from_json(const json& j) {
  return {string_field(j, "instance_id"), string_field(j, "instruction"),
          string_field(j, "answer_a"), string_field(j, "answer_b")};
}

ordered_json to_json(const BenchmarkReport& r) {
  ordered_json j = {{"n", r.n},
                    {"precision_mean", r.precision_mean},
                    {"recall_at_k_mean", r.recall_at_k_mean},
                    {"f1_at_k_mean", r.f1_at_k_mean},
                    {"k", r.k},
                    {"flags", r.flags},
                    {"aggregation", "per_response_mean"}};
  j["precision_micro"] = r.precision_micro ? ordered_json(*r.precision_micro) : ordered_json();
  return j;
}

ordered_json to_json(const BenchmarkRow& r) {
  ordered_json claims = ordered_json::array();
  for (const auto& c : r.claims) {
    claims.push_back({{"id", c.id},
                      {"text", c.text},
                      {"label", c.label ? std::string(to_string(*c.label)) : std::string()}});
  }
  return {{"instance_id", r.instance_id},
          {"supported", r.counts.supported},
          {"not_supported", r.counts.not_supported},
          {"precision", r.precision},
          {"recall_at_k", r.recall_at_k},
          {"f1_at_k", r.f1_at_k},
          {"no_facts", r.no_facts},
          {"claims", std::move(claims)}};
}

ordered_json to_json(const WinRateReport& r) {
  return {{"n", r.n}, {"win_rate", r.win_rate}, {"ties", r.ties}};
}

ordered_json to_json(const PairJudgment& j) {
  return {{"instance_id", j.instance_id},
          {"win_trial_1", j.win_trial_1},
          {"win_trial_2", j.win_trial_2}};
}

}  // namespace factalign
