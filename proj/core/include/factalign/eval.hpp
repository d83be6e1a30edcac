#pragma once
// Long-form factuality metrics and the benchmark runners built on them.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factalign/judge.hpp"
#include "factalign/retrieval.hpp"

namespace factalign {

struct FactCounts {
  std::size_t supported = 0;
  std::size_t not_supported = 0;
};

// S / (S + N). Throws NoFacts when S + N = 0.
double precision(const FactCounts& c);
// min(S / K, 1). Throws InvalidArgument when K = 0.
double recall_at_k(std::size_t supported, std::size_t k);
// 0 when S = 0, else the harmonic mean of precision and recall_at_k.
double f1_at_k(const FactCounts& c, std::size_t k);

struct PairJudgment {
  std::string instance_id;
  double win_trial_1 = 0.0;  // 1 if answer_b won, 0.5 on a declared tie
  double win_trial_2 = 0.0;
};

// Mean of (trial_1 + trial_2) / 2. Throws EmptyJudgments.
double win_rate(const std::vector<PairJudgment>& judgments);

// Trial 1 shows (a, b) as (output_1, output_2); trial 2 swaps them. Each trial
// scores answer_b.
PairJudgment judge_pair(const PairwiseJudge& judge, std::string_view instruction,
                        std::string_view answer_a, std::string_view answer_b,
                        std::string instance_id = "");

struct BenchmarkInstance {
  std::string instance_id;
  std::string instruction;
  std::string answer;
};

struct PairInstance {
  std::string instance_id;
  std::string instruction;
  std::string answer_a;
  std::string answer_b;
};

struct BenchmarkRow {
  std::string instance_id;
  FactCounts counts;
  double precision = 0.0;
  double recall_at_k = 0.0;
  double f1_at_k = 0.0;
  bool no_facts = false;  // precision recorded as 0
  std::vector<Claim> claims;
};

struct BenchmarkReport {
  std::size_t n = 0;
  std::size_t k = 0;
  double precision_mean = 0.0;  // per-response average
  double recall_at_k_mean = 0.0;
  double f1_at_k_mean = 0.0;
  // Pooled over all facts: sum S / sum (S + N); absent when no facts at all.
  std::optional<double> precision_micro;
  std::vector<std::string> flags;
  std::vector<BenchmarkRow> rows;
};

// extract -> retrieve(top_k) -> verify per answer. SUPPORT counts as supported,
// REFUTE and NOT_ENOUGH_INFO as not supported. An empty answer yields no facts.
// Throws InvalidArgument for an empty instance list; judge errors carry the
// instance id.
BenchmarkReport run_benchmark(const std::vector<BenchmarkInstance>& instances,
                              const RetrievalIndex& index, const ClaimExtractor& extractor,
                              const ClaimVerifier& verifier, std::size_t k);

struct WinRateReport {
  std::size_t n = 0;
  double win_rate = 0.0;
  std::size_t ties = 0;  // trials where the judge returned equal ranks
  std::vector<PairJudgment> judgments;
};

WinRateReport run_win_rate(const std::vector<PairInstance>& pairs, const PairwiseJudge& judge);

BenchmarkInstance benchmark_instance_from_json(const nlohmann::json& j);
PairInstance pair_instance_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const BenchmarkReport& r);  // summary only
nlohmann::ordered_json to_json(const BenchmarkRow& r);
nlohmann::ordered_json to_json(const WinRateReport& r);    // summary only
nlohmann::ordered_json to_json(const PairJudgment& j);

}  // namespace factalign
