#include <benchmark/benchmark.h>

#include <random>

#include "agentmend/analytics.hpp"

using namespace agentmend;

static void BM_CohensKappa(benchmark::State& state) {
  std::mt19937 rng(1);
  const std::vector<std::string> cats{"Tool", "Memory", "Planning", "Reasoning"};
  std::vector<std::string> a, b;
  for (int i = 0; i < state.range(0); ++i) {
    a.push_back(cats[rng() % cats.size()]);
    b.push_back(rng() % 10 ? a.back() : cats[rng() % cats.size()]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(cohens_kappa(a, b));
}
BENCHMARK(BM_CohensKappa)->Arg(1025)->Arg(100000);

static void BM_PatternDistribution(benchmark::State& state) {
  std::mt19937 rng(2);
  std::vector<AnnotatedFix> corpus(static_cast<std::size_t>(state.range(0)));
  for (auto& f : corpus) {
    f.pattern = static_cast<FixPatternId>(rng() % 23);
    f.framework = "fw" + std::to_string(rng() % 8);
  }
  for (auto _ : state) benchmark::DoNotOptimize(pattern_distribution(corpus, GroupBy::Pattern));
}
BENCHMARK(BM_PatternDistribution)->Arg(1025);

BENCHMARK_MAIN();
