#include "agentmend/websearch.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

#include "agentmend/error.hpp"
#include "agentmend/http.hpp"
#include "agentmend/text.hpp"

namespace agentmend {

void to_json(nlohmann::json& j, const SearchResult& r) {
  j = nlohmann::json{{"title", r.title}, {"url", r.url}, {"snippet", r.snippet}, {"rank", r.rank}, {"domain", r.domain}};
}

void from_json(const nlohmann::json& j, SearchResult& r) {
  r.title = j.value("title", std::string{});
  r.url = j.at("url").get<std::string>();
  r.snippet = j.value("snippet", std::string{});
  r.rank = j.value("rank", 0);
  r.domain = j.contains("domain") ? j["domain"].get<std::string>() : registrable_domain(host_of(r.url));
}

std::string host_of(std::string_view url) {
  auto rest = url;
  if (const auto p = rest.find("://"); p != std::string_view::npos) {
    rest = rest.substr(p + 3);
  } else if (rest.substr(0, 2) == "//") {
    rest = rest.substr(2);
  }
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (const auto at = rest.rfind('@'); at != std::string_view::npos) rest = rest.substr(at + 1);
  if (!rest.empty() && rest.front() == '[') return {};  // IPv6 literal, never a registrable domain
  rest = rest.substr(0, rest.find(':'));
  auto host = text::to_lower(rest);
  while (!host.empty() && host.back() == '.') host.pop_back();
  return host;
}

namespace {

constexpr std::array<std::string_view, 14> kTwoLevelSuffixes = {
    "co.uk", "org.uk", "ac.uk", "gov.uk", "com.au", "net.au", "org.au",
    "co.jp", "ne.jp",  "co.in", "com.br", "com.cn", "co.kr",  "co.nz",
};

std::string normalize_domain(std::string_view d) {
  auto host = d.find("://") != std::string_view::npos || d.find('/') != std::string_view::npos
                  ? host_of(d)
                  : [&] {
                      auto s = text::to_lower(text::trim(d));
                      while (!s.empty() && s.back() == '.') s.pop_back();
                      return s;
                    }();
  for (std::string_view prefix : {"*.", "www."}) {
    if (host.rfind(prefix, 0) == 0) host.erase(0, prefix.size());
  }
  return host;
}

}  // namespace

std::string registrable_domain(std::string_view host_in) {
  const auto host = normalize_domain(host_in);
  std::vector<std::string_view> labels;
  std::string_view rest = host;
  while (true) {
    const auto dot = rest.find('.');
    labels.push_back(rest.substr(0, dot));
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
  }
  std::size_t keep = 2;
  if (labels.size() >= 3) {
    const std::string last_two = std::string(labels[labels.size() - 2]) + "." + std::string(labels.back());
    if (std::find(kTwoLevelSuffixes.begin(), kTwoLevelSuffixes.end(), last_two) != kTwoLevelSuffixes.end()) keep = 3;
  }
  if (labels.size() <= keep) return host;
  std::string out;
  for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) {
    if (!out.empty()) out += '.';
    out += labels[i];
  }
  return out;
}

bool host_matches_domain(std::string_view host_in, std::string_view domain_in) {
  const auto host = normalize_domain(host_in);
  const auto domain = normalize_domain(domain_in);
  if (domain.empty() || host.empty()) return false;
  if (host == domain) return true;
  return host.size() > domain.size() && host.compare(host.size() - domain.size(), domain.size(), domain) == 0 &&
         host[host.size() - domain.size() - 1] == '.';
}

namespace {

bool excluded(const SearchResult& r, const DomainSet& exclude) {
  const auto host = host_of(r.url);
  for (const auto& entry : exclude) {
    // Widen to the registrable domain: excluding meta.example.com also
    // drops example.com and its other mirrors.
    const auto d = registrable_domain(host_of(entry));
    if (d.empty()) continue;
    // The stored domain is checked too, in case a backend reports a
    // registrable domain that differs from the URL host.
    if (host_matches_domain(host, d) || host_matches_domain(r.domain, d)) return true;
  }
  return false;
}

}  // namespace

std::vector<SearchResult> filter_results(std::vector<SearchResult> results, const DomainSet& exclude,
                                         std::size_t limit) {
  std::vector<SearchResult> out;
  out.reserve(std::min(results.size(), limit));
  for (auto& r : results) {
    if (out.size() >= limit) break;
    if (excluded(r, exclude)) continue;
    out.push_back(std::move(r));
    out.back().rank = static_cast<int>(out.size());
  }
  return out;
}

// --- fixture backend -------------------------------------------------------

FixtureSearchBackend::FixtureSearchBackend(nlohmann::json fixture) : fixture_(std::move(fixture)) {
  if (!fixture_.is_object()) throw Error(Errc::ConfigInvalid, "search fixture must be a JSON object");
}

std::shared_ptr<FixtureSearchBackend> FixtureSearchBackend::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::MissingFile, "search fixture " + path.string());
  try {
    return std::make_shared<FixtureSearchBackend>(nlohmann::json::parse(text::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, path.string() + ": " + e.what());
  }
}

std::vector<SearchResult> FixtureSearchBackend::query(const std::string& query, std::size_t want) {
  const auto it = fixture_.find(query);
  if (it == fixture_.end()) return {};
  if (it->is_object() && it->contains("error")) {
    const auto kind = (*it)["error"].get<std::string>();
    if (kind == "quota") throw Error(Errc::QuotaExceeded, "fixture quota for \"" + query + "\"");
    throw Error(Errc::TransportError, "fixture transport failure for \"" + query + "\"");
  }
  std::vector<SearchResult> out;
  for (const auto& item : *it) {
    if (out.size() >= want) break;
    auto r = item.get<SearchResult>();
    r.rank = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(r));
  }
  return out;
}

// --- SerpApi ---------------------------------------------------------------

SerpApiBackend::SerpApiBackend(std::string endpoint, std::string key_env, double timeout_seconds)
    : endpoint_(std::move(endpoint)), key_env_(std::move(key_env)), timeout_(timeout_seconds) {}

std::vector<SearchResult> SerpApiBackend::query(const std::string& query, std::size_t want) {
  const char* key = std::getenv(key_env_.c_str());
  if (key == nullptr || *key == '\0') throw Error(Errc::ConfigInvalid, "environment variable " + key_env_ + " is not set");
  const auto base = http::parse_url(endpoint_);
  const auto response = http::get(base, "/search",
                                  {{"engine", "google"}, {"q", query}, {"num", std::to_string(want)}, {"api_key", key}},
                                  {}, timeout_);
  if (response.status == 429) throw Error(Errc::QuotaExceeded, "search API quota exhausted");
  if (response.status != 200) throw Error(Errc::TransportError, "search API HTTP " + std::to_string(response.status));

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(Errc::TransportError, "unparseable search response");
  }
  if (body.contains("error")) {
    const auto msg = body["error"].is_string() ? body["error"].get<std::string>() : body["error"].dump();
    if (text::to_lower(msg).find("run out of searches") != std::string::npos) throw Error(Errc::QuotaExceeded, msg);
    throw Error(Errc::TransportError, msg);
  }
  std::vector<SearchResult> out;
  for (const auto& item : body.value("organic_results", nlohmann::json::array())) {
    if (out.size() >= want) break;
    if (!item.contains("link")) continue;
    SearchResult r;
    r.title = item.value("title", std::string{});
    r.url = item["link"].get<std::string>();
    r.snippet = item.value("snippet", std::string{});
    r.domain = registrable_domain(host_of(r.url));
    r.rank = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(r));
  }
  return out;
}

// --- client ----------------------------------------------------------------

SearchClient::SearchClient(std::shared_ptr<SearchBackend> backend, RateLimiter* limiter)
    : backend_(std::move(backend)), limiter_(limiter) {
  if (!backend_) throw Error(Errc::PreconditionViolation, "search backend is null");
}

std::vector<SearchResult> SearchClient::search(const std::string& query, const DomainSet& exclude, std::size_t limit) {
  if (text::is_blank(query)) throw Error(Errc::EmptyQuery, "search query is empty");
  if (limit == 0 || limit > backend_->max_results()) {
    throw Error(Errc::PreconditionViolation,
                "limit " + std::to_string(limit) + " outside 1.." + std::to_string(backend_->max_results()));
  }
  if (backend_->is_live() && limiter_ != nullptr) limiter_->acquire();
  // Over-fetch so filtering still leaves `limit` results when possible.
  const auto want = std::min(backend_->max_results(), limit + 5 * (exclude.empty() ? 0 : limit));
  auto results = filter_results(backend_->query(query, want), exclude, limit);

  std::lock_guard lock(mu_);
  log_.push_back(SearchLogEntry{query, exclude, results});
  return results;
}

std::vector<SearchLogEntry> SearchClient::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

void SearchClient::clear_log() {
  std::lock_guard lock(mu_);
  log_.clear();
}

}  // namespace agentmend
