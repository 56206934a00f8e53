#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <httplib.h>

#include "antiphish/error.hpp"

namespace antiphish::evidence {

/// An endpoint URL split into the origin httplib connects to and the
/// request path.
struct HttpEndpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/', may carry a query

  static HttpEndpoint parse(std::string_view url) {
    HttpEndpoint ep;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
      throw Error(Errc::InvalidArgument, "evidence", "endpoint needs a scheme: " + std::string(url));
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) {
      ep.origin = std::string(url);
      ep.path = "/";
    } else {
      ep.origin = std::string(url.substr(0, path_start));
      ep.path = std::string(url.substr(path_start));
    }
    while (ep.path.size() > 1 && ep.path.back() == '/') ep.path.pop_back();
    return ep;
  }

  /// path joined with a suffix ("/session" etc.).
  [[nodiscard]] std::string join(std::string_view suffix) const {
    return (path == "/" ? std::string() : path) + std::string(suffix);
  }
};

inline std::unique_ptr<httplib::Client> make_http_client(const std::string& origin, std::chrono::milliseconds timeout) {
  auto client = std::make_unique<httplib::Client>(origin);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  client->set_follow_location(false);
  return client;
}

inline std::optional<std::string> env_value(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

inline bool is_timeout(httplib::Error e) {
  return e == httplib::Error::ConnectionTimeout || e == httplib::Error::Read || e == httplib::Error::Write;
}

}  // namespace antiphish::evidence
