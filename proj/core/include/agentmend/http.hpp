#pragma once

#include <map>
#include <string>
#include <string_view>

namespace agentmend::http {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // no trailing slash; may be empty

  std::string origin() const;
};

/// Throws Error(ConfigInvalid) for anything that is not http(s)://host[:port][/path].
Url parse_url(std::string_view url);

struct Response {
  int status = 0;
  std::string body;
};

using Headers = std::map<std::string, std::string>;

/// Connection-level failures throw Error(TransportError); any HTTP status is
/// returned to the caller for classification.
Response post_json(const Url& base, const std::string& path, const Headers& headers,
                   const std::string& body, double timeout_seconds);
Response get(const Url& base, const std::string& path, const std::map<std::string, std::string>& query,
             const Headers& headers, double timeout_seconds);

/// 429 and 5xx are worth retrying; other 4xx are not.
bool is_retryable_status(int status) noexcept;

}  // namespace agentmend::http
