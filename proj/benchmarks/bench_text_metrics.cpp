#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "tablerl/text_metrics.hpp"

namespace {

std::string random_sentence(std::mt19937& rng, int words) {
  static const char* vocab[] = {"table", "row",   "value", "column", "the",
                                "max",   "cell",  "is",    "equal",  "to",
                                "score", "match", "gold",  "answer", "count"};
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += vocab[rng() % 15];
  }
  return out;
}

}  // namespace

static void BM_Normalize(benchmark::State& state) {
  std::mt19937 rng(1);
  const std::string text = "  The, Value: 1,234 (approx.) " +
                           random_sentence(rng, static_cast<int>(state.range(0)));
  const tablerl::NormalizationPolicy policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tablerl::normalize(text, policy));
  }
}
BENCHMARK(BM_Normalize)->Arg(8)->Arg(64);

static void BM_RougeL(benchmark::State& state) {
  std::mt19937 rng(2);
  const std::string cand = random_sentence(rng, static_cast<int>(state.range(0)));
  const std::string ref = random_sentence(rng, static_cast<int>(state.range(0)));
  const tablerl::NormalizationPolicy policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tablerl::rouge_l(cand, ref, policy));
  }
}
BENCHMARK(BM_RougeL)->Arg(16)->Arg(64)->Arg(256);

static void BM_Bleu(benchmark::State& state) {
  std::mt19937 rng(3);
  const std::string cand = random_sentence(rng, static_cast<int>(state.range(0)));
  const std::string ref = random_sentence(rng, static_cast<int>(state.range(0)));
  const tablerl::NormalizationPolicy policy;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tablerl::bleu(cand, ref, policy));
  }
}
BENCHMARK(BM_Bleu)->Arg(16)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
