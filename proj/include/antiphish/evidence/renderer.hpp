#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "antiphish/evidence/http.hpp"
#include "antiphish/evidence/network.hpp"
#include "antiphish/evidence/types.hpp"
#include "antiphish/textmetrics.hpp"
#include "antiphish/urlkit.hpp"

namespace antiphish::evidence {

/// Non-2xx/3xx initial response. The snapshot (status set, bodies empty) is
/// kept so the page can still be recorded and featurized.
class HttpStatusError : public Error {
 public:
  explicit HttpStatusError(PageSnapshot snapshot)
      : Error(Errc::HttpError, "evidence", "HTTP " + std::to_string(snapshot.http_status) + " for " + snapshot.url_initial),
        snapshot_(std::move(snapshot)) {}

  [[nodiscard]] const PageSnapshot& snapshot() const { return snapshot_; }

 private:
  PageSnapshot snapshot_;
};

struct RenderSettings {
  std::chrono::milliseconds quiet_period = std::chrono::seconds(2);
  std::chrono::milliseconds max_wait = std::chrono::seconds(15);
  std::chrono::milliseconds poll_interval = std::chrono::milliseconds(100);
};

/// Minimal client for the W3C WebDriver wire protocol: new session,
/// navigate, readyState, current URL, page source, delete session.
class WebDriverSession {
 public:
  WebDriverSession(std::string endpoint, std::chrono::milliseconds timeout)
      : endpoint_(HttpEndpoint::parse(endpoint)), client_(make_http_client(endpoint_.origin, timeout)) {
    nlohmann::json caps = {
        {"capabilities",
         {{"alwaysMatch", {{"browserName", "chrome"}, {"goog:chromeOptions", {{"args", {"--headless=new"}}}}}}}}};
    auto value = call("POST", "/session", caps);
    if (value.is_object() && value.contains("sessionId")) {
      id_ = value.at("sessionId").get<std::string>();
    } else {
      throw Error(Errc::RendererUnavailable, "evidence", "renderer returned no session id");
    }
  }

  WebDriverSession(const WebDriverSession&) = delete;
  WebDriverSession& operator=(const WebDriverSession&) = delete;

  ~WebDriverSession() {
    try {
      client_->Delete(endpoint_.join("/session/" + id_));
    } catch (...) {
    }
  }

  void set_page_load_timeout(std::chrono::milliseconds t) {
    call("POST", session_path("/timeouts"), {{"pageLoad", t.count()}});
  }
  void navigate(const std::string& url) { call("POST", session_path("/url"), {{"url", url}}); }
  std::string ready_state() {
    auto v = call("POST", session_path("/execute/sync"),
                  {{"script", "return document.readyState"}, {"args", nlohmann::json::array()}});
    return v.is_string() ? v.get<std::string>() : std::string();
  }
  std::string current_url() { return call("GET", session_path("/url")).get<std::string>(); }
  std::string page_source() { return call("GET", session_path("/source")).get<std::string>(); }

 private:
  std::string session_path(std::string_view suffix) const { return "/session/" + id_ + std::string(suffix); }

  nlohmann::json call(const std::string& method, const std::string& suffix,
                      const nlohmann::json& body = nlohmann::json::object()) {
    const auto path = endpoint_.join(suffix);
    httplib::Result res = method == "GET" ? client_->Get(path) : client_->Post(path, body.dump(), "application/json");
    if (!res) {
      throw Error(Errc::RendererUnavailable, "evidence", "renderer: " + httplib::to_string(res.error()));
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("value")) {
      throw Error(Errc::RendererUnavailable, "evidence", "renderer: malformed reply to " + suffix);
    }
    const auto& value = parsed.at("value");
    if (res->status != 200) {
      const std::string kind = value.is_object() && value.contains("error") ? value.at("error").get<std::string>() : "";
      if (kind == "timeout") throw Error(Errc::FetchTimeout, "evidence", "renderer: page load timeout");
      throw Error(Errc::RendererUnavailable, "evidence",
                  "renderer: HTTP " + std::to_string(res->status) + (kind.empty() ? "" : " " + kind));
    }
    return value;
  }

  HttpEndpoint endpoint_;
  std::unique_ptr<httplib::Client> client_;
  std::string id_;
};

struct RenderedPage {
  std::string final_url;
  std::string html;
};

/// Navigates, waits for document ready, then waits until URL and DOM stay
/// unchanged for one quiet period (bounded by max_wait).
inline RenderedPage render_page(const std::string& renderer_endpoint, const std::string& url,
                                const RenderSettings& settings, std::chrono::milliseconds timeout) {
  WebDriverSession session(renderer_endpoint, timeout);
  session.set_page_load_timeout(settings.max_wait);
  session.navigate(url);
  const auto deadline = std::chrono::steady_clock::now() + settings.max_wait;
  while (session.ready_state() != "complete" && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(settings.poll_interval);
  }
  RenderedPage page{session.current_url(), session.page_source()};
  while (std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(settings.quiet_period);
    RenderedPage again{session.current_url(), session.page_source()};
    const bool stable = again.final_url == page.final_url && again.html == page.html;
    page = std::move(again);
    if (stable) break;
  }
  return page;
}

inline Timestamp now_seconds() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

/// Fetches the raw page, then (when a renderer is configured) the rendered
/// DOM and final location.
inline PageSnapshot fetch_snapshot(const NetworkPolicy& policy, const std::string& url,
                                   const std::string& renderer_endpoint, std::chrono::milliseconds timeout,
                                   const RenderSettings& settings = {}) {
  policy.require_live("page fetch");
  const auto parts = urlkit::parse_url(url);
  PageSnapshot snap;
  snap.url_initial = url;
  snap.url_final = url;
  snap.fetched_at = now_seconds();

  std::string origin = parts.scheme + "://" + parts.host + (parts.port.empty() ? "" : ":" + parts.port);
  std::string path = parts.path_and_query.empty() ? "/" : parts.path_and_query;
  if (auto hash = path.find('#'); hash != std::string::npos) path.erase(hash);
  if (path.empty() || path.front() != '/') path.insert(path.begin(), '/');
  auto client = make_http_client(origin, timeout);
  auto res = client->Get(path);
  if (!res) throw Error(Errc::FetchTimeout, "evidence", url + ": " + httplib::to_string(res.error()));
  snap.http_status = res->status;
  if (res->status < 200 || res->status >= 400) throw HttpStatusError(snap);
  snap.html_initial = textmetrics::sanitize_utf8(res->body);

  if (!renderer_endpoint.empty()) {
    auto page = render_page(renderer_endpoint, url, settings, timeout);
    snap.url_final = page.final_url.empty() ? url : page.final_url;
    snap.html_rendered = textmetrics::sanitize_utf8(page.html);
  }
  return snap;
}

}  // namespace antiphish::evidence
