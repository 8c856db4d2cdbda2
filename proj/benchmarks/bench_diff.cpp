#include <benchmark/benchmark.h>

#include <random>

#include "agentmend/diff.hpp"

using namespace agentmend;

namespace {

std::vector<std::string> random_lines(std::mt19937& rng, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("line " + std::to_string(rng() % 50));
  return out;
}

// B is A with roughly 5% of lines replaced.
std::pair<std::vector<std::string>, std::vector<std::string>> similar_pair(std::size_t n) {
  std::mt19937 rng(42);
  auto a = random_lines(rng, n);
  auto b = a;
  for (auto& line : b)
    if (rng() % 20 == 0) line = "changed " + std::to_string(rng());
  return {a, b};
}

}  // namespace

static void BM_LineDiffSimilar(benchmark::State& state) {
  const auto [a, b] = similar_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(diff::line_diff(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LineDiffSimilar)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void BM_LineDiffUnrelated(benchmark::State& state) {
  std::mt19937 rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_lines(rng, n), b = random_lines(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(diff::line_diff(a, b));
}
BENCHMARK(BM_LineDiffUnrelated)->RangeMultiplier(4)->Range(64, 1024);

static void BM_RenderUnified(benchmark::State& state) {
  const auto [a, b] = similar_pair(static_cast<std::size_t>(state.range(0)));
  const auto script = diff::line_diff(a, b);
  for (auto _ : state) benchmark::DoNotOptimize(diff::render_unified(script, "a.py", "b.py"));
}
BENCHMARK(BM_RenderUnified)->Arg(1024)->Arg(8192);

static void BM_FunctionMap(benchmark::State& state) {
  std::string src;
  for (int f = 0; f < state.range(0); ++f) {
    src += "def f" + std::to_string(f) + "(x):\n    y = x + 1\n    return y\n\n";
  }
  for (auto _ : state) benchmark::DoNotOptimize(diff::function_map(src));
}
BENCHMARK(BM_FunctionMap)->Arg(10)->Arg(1000);

BENCHMARK_MAIN();
