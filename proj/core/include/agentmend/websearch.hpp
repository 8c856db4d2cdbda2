#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "agentmend/clock.hpp"

namespace agentmend {

struct SearchResult {
  std::string title;
  std::string url;
  std::string snippet;
  int rank = 0;        // 1-based
  std::string domain;  // registrable domain of url

  bool operator==(const SearchResult&) const = default;
};

void to_json(nlohmann::json& j, const SearchResult& r);
/// `domain` and `rank` are optional in the JSON and derived when absent.
void from_json(const nlohmann::json& j, SearchResult& r);

/// Lower-cased host of a URL, without port or userinfo. Empty when the URL
/// has no recognizable host.
std::string host_of(std::string_view url);

/// Last two labels of a host, or three under common two-level suffixes
/// ("co.uk", "com.au", ...).
std::string registrable_domain(std::string_view host);

/// True when `host` equals `domain` or is one of its subdomains. Both sides
/// are normalized (case, leading "www." / "*.", trailing dot, any scheme).
bool host_matches_domain(std::string_view host, std::string_view domain);

using DomainSet = std::set<std::string>;

/// Drops excluded results, keeps at most `limit`, renumbers ranks 1..n.
std::vector<SearchResult> filter_results(std::vector<SearchResult> results, const DomainSet& exclude,
                                         std::size_t limit);

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  /// Raw provider ranking; exclusion happens in SearchClient.
  virtual std::vector<SearchResult> query(const std::string& query, std::size_t want) = 0;
  virtual std::size_t max_results() const { return 10; }
  virtual bool is_live() const { return true; }
};

/// JSON object mapping query text to a result list. Unknown queries return
/// no results. A query whose value is {"error": "quota"} or
/// {"error": "transport"} raises the matching error.
class FixtureSearchBackend final : public SearchBackend {
 public:
  explicit FixtureSearchBackend(nlohmann::json fixture);
  static std::shared_ptr<FixtureSearchBackend> load(const std::filesystem::path& path);

  std::vector<SearchResult> query(const std::string& query, std::size_t want) override;
  std::size_t max_results() const override { return 100; }
  bool is_live() const override { return false; }

 private:
  nlohmann::json fixture_;
};

/// SerpApi's Google engine; key taken from the named environment variable.
class SerpApiBackend final : public SearchBackend {
 public:
  SerpApiBackend(std::string endpoint, std::string key_env, double timeout_seconds = 30.0);
  std::vector<SearchResult> query(const std::string& query, std::size_t want) override;

 private:
  std::string endpoint_;
  std::string key_env_;
  double timeout_;
};

struct SearchLogEntry {
  std::string query;
  DomainSet exclude;
  std::vector<SearchResult> results;  // post-filter
};

/// Thread-safe front end. Every search is logged so callers can audit
/// leakage after the fact.
class SearchClient {
 public:
  static constexpr std::size_t kDefaultLimit = 5;

  explicit SearchClient(std::shared_ptr<SearchBackend> backend, RateLimiter* limiter = &shared_rate_limiter());

  /// Throws EmptyQuery for blank queries and PreconditionViolation when
  /// limit is 0 or above the backend maximum.
  std::vector<SearchResult> search(const std::string& query, const DomainSet& exclude,
                                   std::size_t limit = kDefaultLimit);

  std::vector<SearchLogEntry> log() const;
  void clear_log();
  SearchBackend& backend() const noexcept { return *backend_; }

 private:
  std::shared_ptr<SearchBackend> backend_;
  RateLimiter* limiter_;
  mutable std::mutex mu_;
  std::vector<SearchLogEntry> log_;
};

}  // namespace agentmend
