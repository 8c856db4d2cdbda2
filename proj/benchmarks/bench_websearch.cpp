#include <benchmark/benchmark.h>

#include "agentmend/websearch.hpp"

using namespace agentmend;

static void BM_FilterResults(benchmark::State& state) {
  const std::vector<std::string> hosts{"stackoverflow.com", "meta.stackoverflow.com", "github.com",
                                       "docs.python.org", "discuss.huggingface.co", "news.bbc.co.uk"};
  std::vector<SearchResult> results;
  for (int i = 0; i < state.range(0); ++i) {
    SearchResult r;
    r.url = "https://" + hosts[i % hosts.size()] + "/p/" + std::to_string(i);
    r.rank = i + 1;
    results.push_back(std::move(r));
  }
  const DomainSet exclude{"stackoverflow.com", "huggingface.co"};
  for (auto _ : state) benchmark::DoNotOptimize(filter_results(results, exclude, 10));
}
BENCHMARK(BM_FilterResults)->Arg(10)->Arg(100);

static void BM_RegistrableDomain(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(registrable_domain("a.b.news.bbc.co.uk"));
    benchmark::DoNotOptimize(registrable_domain("discuss.huggingface.co"));
  }
}
BENCHMARK(BM_RegistrableDomain);

BENCHMARK_MAIN();
