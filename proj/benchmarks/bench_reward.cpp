#include <benchmark/benchmark.h>

#include <random>

#include "factalign/reward.hpp"

namespace fa = factalign;

namespace {

fa::ChecklistVerdicts random_verdicts(std::size_t n, std::mt19937_64& rng) {
  fa::ChecklistVerdicts v;
  v.query_id = "q";
  for (std::size_t i = 0; i < n; ++i) {
    v.outcomes.push_back({i, static_cast<fa::Verdict>(rng() % 3), ""});
  }
  return v;
}

void BM_ComputeBreakdown(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto resp = fa::parse_structured_response("<think>t</think><answer>a b c</answer>");
  fa::RewardInputs in;
  in.response = &resp;
  in.verdicts = random_verdicts(static_cast<std::size_t>(state.range(0)), rng);
  std::vector<double> probs(static_cast<std::size_t>(state.range(0)));
  for (auto& p : probs) p = std::uniform_real_distribution<double>(0, 1)(rng);
  in.truth_probs = probs;
  in.general = 0.5;
  in.answer_length = 900;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fa::compute_breakdown(in, fa::RewardMode::kBoth, {}, {}, false).total);
  }
}
BENCHMARK(BM_ComputeBreakdown)->Arg(8)->Arg(64)->Arg(512);

void BM_ParseStructuredResponse(benchmark::State& state) {
  std::string body(static_cast<std::size_t>(state.range(0)), 'x');
  const std::string raw = "<think>reasoning</think><answer>" + body + "</answer>";
  for (auto _ : state) benchmark::DoNotOptimize(fa::parse_structured_response(raw).format_valid);
}
BENCHMARK(BM_ParseStructuredResponse)->Arg(256)->Arg(8192);

void BM_LengthPenalty(benchmark::State& state) {
  const fa::LengthPolicy policy{};
  std::size_t len = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fa::compute_length_penalty(len, policy));
    len = (len + 37) % 2600;
  }
}
BENCHMARK(BM_LengthPenalty);

}  // namespace
