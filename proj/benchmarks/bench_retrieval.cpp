#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "factalign/retrieval.hpp"

namespace fa = factalign;

namespace {

std::vector<fa::Document> synthetic_corpus(std::size_t docs, std::size_t tokens) {
  std::mt19937_64 rng(3);
  std::vector<fa::Document> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    for (std::size_t t = 0; t < tokens; ++t) text += "w" + std::to_string(rng() % 5000) + " ";
    out.push_back({"doc" + std::to_string(d), text});
  }
  return out;
}

void BM_BuildIndex(benchmark::State& state) {
  const auto docs = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 1000);
  for (auto _ : state) benchmark::DoNotOptimize(fa::RetrievalIndex::build(docs).chunks().size());
}
BENCHMARK(BM_BuildIndex)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Retrieve(benchmark::State& state) {
  const auto index = fa::RetrievalIndex::build(synthetic_corpus(static_cast<std::size_t>(state.range(0)), 1000));
  const std::string query = "w12 w345 w999 w4000 w17 w2500";
  for (auto _ : state) benchmark::DoNotOptimize(index.retrieve(query).size());
}
BENCHMARK(BM_Retrieve)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
