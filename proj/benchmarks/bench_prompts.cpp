#include <benchmark/benchmark.h>

#include "agentmend/prompts.hpp"

using namespace agentmend;

static void BM_RenderTemplate(benchmark::State& state) {
  std::string tmpl;
  for (int i = 0; i < 50; ++i) tmpl += "Section {name} uses {value} and keeps {unknown} braces.\n";
  const PromptVars vars{{"name", "fix"}, {"value", std::string(static_cast<std::size_t>(state.range(0)), 'x')}};
  for (auto _ : state) benchmark::DoNotOptimize(render_template(tmpl, vars));
}
BENCHMARK(BM_RenderTemplate)->Arg(16)->Arg(4096);

BENCHMARK_MAIN();
