#include "agentmend/http.hpp"

#include <charconv>

#include <httplib.h>

#include "agentmend/error.hpp"

namespace agentmend::http {

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Url parse_url(std::string_view url) {
  Url out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw Error(Errc::ConfigInvalid, "not a URL: " + std::string(url));
  out.scheme = std::string(url.substr(0, scheme_end));
  if (out.scheme != "http" && out.scheme != "https") {
    throw Error(Errc::ConfigInvalid, "unsupported URL scheme: " + out.scheme);
  }
  auto rest = url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  auto authority = rest.substr(0, slash);
  out.path = slash == std::string_view::npos ? "" : std::string(rest.substr(slash));
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();

  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    const auto port_text = authority.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), out.port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size()) {
      throw Error(Errc::ConfigInvalid, "bad port in URL: " + std::string(url));
    }
    authority = authority.substr(0, colon);
  } else {
    out.port = out.scheme == "https" ? 443 : 80;
  }
  out.host = std::string(authority);
  if (out.host.empty()) throw Error(Errc::ConfigInvalid, "URL without host: " + std::string(url));
  return out;
}

namespace {

template <typename Client>
void configure(Client& cli, double timeout_seconds) {
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  cli.set_follow_location(true);
}

httplib::Headers to_headers(const Headers& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

Response finish(httplib::Result&& result, const std::string& what) {
  if (!result) {
    throw Error(Errc::TransportError, what + ": " + httplib::to_string(result.error()));
  }
  return Response{result->status, result->body};
}

}  // namespace

Response post_json(const Url& base, const std::string& path, const Headers& headers,
                   const std::string& body, double timeout_seconds) {
  httplib::Client cli(base.origin());
  configure(cli, timeout_seconds);
  return finish(cli.Post(base.path + path, to_headers(headers), body, "application/json"),
                "POST " + base.host + base.path + path);
}

Response get(const Url& base, const std::string& path, const std::map<std::string, std::string>& query,
             const Headers& headers, double timeout_seconds) {
  httplib::Client cli(base.origin());
  configure(cli, timeout_seconds);
  httplib::Params params(query.begin(), query.end());
  return finish(cli.Get(base.path + path, params, to_headers(headers)), "GET " + base.host + base.path + path);
}

bool is_retryable_status(int status) noexcept { return status == 429 || status >= 500; }

}  // namespace agentmend::http
