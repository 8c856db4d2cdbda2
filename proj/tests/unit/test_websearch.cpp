#include <gtest/gtest.h>

#include <random>

#include "agentmend/error.hpp"
#include "agentmend/websearch.hpp"

using namespace agentmend;

namespace {

SearchResult result(std::string url, int rank = 0) {
  SearchResult r;
  r.title = "t";
  r.url = url;
  r.snippet = "s";
  r.rank = rank;
  r.domain = registrable_domain(host_of(url));
  return r;
}

nlohmann::json five_results() {
  return nlohmann::json::array({
      {{"title", "a"}, {"url", "https://stackoverflow.com/q/1"}, {"snippet", "x"}},
      {{"title", "b"}, {"url", "https://docs.python.org/3/"}, {"snippet", "x"}},
      {{"title", "c"}, {"url", "https://meta.stackoverflow.com/q/2"}, {"snippet", "x"}},
      {{"title", "d"}, {"url", "https://github.com/x/y"}, {"snippet", "x"}},
      {{"title", "e"}, {"url", "https://python.langchain.com/docs"}, {"snippet", "x"}},
  });
}

RateLimiter& unlimited() {
  static RateLimiter r(0);
  return r;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::IoError;
}

}  // namespace

TEST(Domains, HostExtraction) {
  EXPECT_EQ(host_of("https://User@Meta.StackOverflow.com:443/q?x=1"), "meta.stackoverflow.com");
  EXPECT_EQ(host_of("stackoverflow.com/questions"), "stackoverflow.com");
  EXPECT_EQ(host_of("http://[::1]:80/"), "");  // IPv6 literals have no registrable domain
  EXPECT_EQ(host_of(""), "");
}

TEST(Domains, RegistrableDomain) {
  EXPECT_EQ(registrable_domain("meta.stackoverflow.com"), "stackoverflow.com");
  EXPECT_EQ(registrable_domain("stackoverflow.com"), "stackoverflow.com");
  EXPECT_EQ(registrable_domain("www.bbc.co.uk"), "bbc.co.uk");
  EXPECT_EQ(registrable_domain("localhost"), "localhost");
}

TEST(Domains, Matching) {
  EXPECT_TRUE(host_matches_domain("meta.stackoverflow.com", "stackoverflow.com"));
  EXPECT_TRUE(host_matches_domain("STACKOVERFLOW.COM.", "www.stackoverflow.com"));
  EXPECT_TRUE(host_matches_domain("a.b.discuss.huggingface.co", "https://discuss.huggingface.co/"));
  EXPECT_FALSE(host_matches_domain("notstackoverflow.com", "stackoverflow.com"));
  EXPECT_FALSE(host_matches_domain("huggingface.co", "discuss.huggingface.co"));
}

TEST(Filter, DropsExcludedAndRenumbers) {
  std::vector<SearchResult> in;
  for (const auto& j : five_results()) in.push_back(j.get<SearchResult>());
  const auto out = filter_results(in, {"stackoverflow.com"}, 10);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].rank, static_cast<int>(i + 1));
  EXPECT_EQ(out[0].title, "b");
}

TEST(Filter, ExclusionWidensToRegistrableDomain) {
  const std::vector<SearchResult> in{result("https://stackoverflow.com/q/1", 1), result("https://meta.stackoverflow.com/q/2", 2),
                                     result("https://docs.python.org/3", 3)};
  const auto out = filter_results(in, {"discuss.stackoverflow.com"}, 10);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].url, "https://docs.python.org/3");
  EXPECT_EQ(filter_results(in, {"https://www.stackoverflow.com/"}, 10).size(), 1u);
}

TEST(Filter, DisjointExclusionIsTruncation) {
  std::vector<SearchResult> in;
  for (const auto& j : five_results()) in.push_back(j.get<SearchResult>());
  const auto out = filter_results(in, {"example.org"}, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].url, in[0].url);
  EXPECT_EQ(out[1].url, in[1].url);
}

TEST(Filter, Idempotent) {
  std::vector<SearchResult> in;
  for (const auto& j : five_results()) in.push_back(j.get<SearchResult>());
  const auto once = filter_results(in, {"github.com"}, 4);
  EXPECT_EQ(filter_results(once, {"github.com"}, 4), once);
}

TEST(Filter, FuzzedExclusionSoundness) {
  std::mt19937 rng(99);
  const std::vector<std::string> bases{"stackoverflow.com", "github.com", "huggingface.co", "python.org",
                                       "bbc.co.uk", "example.com"};
  const std::vector<std::string> subs{"", "www.", "meta.", "a.b.", "discuss."};
  for (int round = 0; round < 500; ++round) {
    std::vector<SearchResult> in;
    const int n = rng() % 12;
    for (int i = 0; i < n; ++i) {
      in.push_back(result("https://" + subs[rng() % subs.size()] + bases[rng() % bases.size()] + "/p", i + 1));
    }
    DomainSet exclude;
    for (const auto& b : bases) {
      if (rng() % 3 == 0) exclude.insert(rng() % 2 ? b : "www." + b);
    }
    const auto out = filter_results(in, exclude, 100);
    for (const auto& r : out) {
      for (const auto& d : exclude) ASSERT_FALSE(host_matches_domain(host_of(r.url), d)) << r.url << " vs " << d;
    }
    for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(out[i].rank, static_cast<int>(i + 1));
  }
}

TEST(SearchResultJson, DerivesDomain) {
  const auto r = nlohmann::json{{"title", "t"}, {"url", "https://meta.stackoverflow.com/x"}, {"snippet", ""}}
                     .get<SearchResult>();
  EXPECT_EQ(r.domain, "stackoverflow.com");
  const nlohmann::json back = r;
  EXPECT_EQ(back.get<SearchResult>(), r);
}

TEST(SearchClient, FixtureBackendWithExclusion) {
  SearchClient client(std::make_shared<FixtureSearchBackend>(nlohmann::json{{"q", five_results()}}), &unlimited());
  const auto out = client.search("q", {"stackoverflow.com"}, 5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[2].rank, 3);
  EXPECT_TRUE(client.search("unknown", {}, 5).empty());
  ASSERT_EQ(client.log().size(), 2u);
  EXPECT_EQ(client.log()[0].exclude, (DomainSet{"stackoverflow.com"}));
  client.clear_log();
  EXPECT_TRUE(client.log().empty());
}

TEST(SearchClient, OverFetchesSoLimitHoldsAfterFiltering) {
  // Three excluded results ahead of three kept ones; limit 3 still yields 3.
  auto list = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) list.push_back({{"title", "x"}, {"url", "https://stackoverflow.com/" + std::to_string(i)}});
  for (int i = 0; i < 3; ++i) list.push_back({{"title", "y"}, {"url", "https://python.org/" + std::to_string(i)}});
  SearchClient client(std::make_shared<FixtureSearchBackend>(nlohmann::json{{"q", list}}), &unlimited());
  EXPECT_EQ(client.search("q", {"stackoverflow.com"}, 3).size(), 3u);
}

TEST(SearchClient, Errors) {
  SearchClient client(std::make_shared<FixtureSearchBackend>(nlohmann::json{
                          {"quota", {{"error", "quota"}}}, {"down", {{"error", "transport"}}}}),
                      &unlimited());
  EXPECT_EQ(code_of([&] { (void)client.search("  ", {}); }), Errc::EmptyQuery);
  EXPECT_EQ(code_of([&] { (void)client.search("q", {}, 0); }), Errc::PreconditionViolation);
  EXPECT_EQ(code_of([&] { (void)client.search("q", {}, 1000); }), Errc::PreconditionViolation);
  EXPECT_EQ(code_of([&] { (void)client.search("quota", {}); }), Errc::QuotaExceeded);
  EXPECT_EQ(code_of([&] { (void)client.search("down", {}); }), Errc::TransportError);
}

TEST(SearchClient, LoadMissingFixture) {
  EXPECT_EQ(code_of([] { (void)FixtureSearchBackend::load("/nonexistent/search.json"); }), Errc::MissingFile);
}
