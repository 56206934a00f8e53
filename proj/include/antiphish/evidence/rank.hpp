#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/evidence/http.hpp"
#include "antiphish/evidence/network.hpp"
#include "antiphish/evidence/types.hpp"
#include "antiphish/urlkit.hpp"

namespace antiphish::evidence {

/// Scans the top ten result URLs for hosts sharing the queried registrable
/// domain.
inline RankInfo rank_from_results(const std::string& domain, const std::vector<std::string>& result_urls,
                                  const urlkit::SuffixRules& rules = urlkit::SuffixRules::defaults()) {
  const auto target = urlkit::parse_url(domain, rules).registrable_domain;
  RankInfo info;
  const std::size_t limit = std::min<std::size_t>(result_urls.size(), 10);
  for (std::size_t i = 0; i < limit; ++i) {
    std::string reg;
    try {
      reg = urlkit::parse_url(result_urls[i], rules).registrable_domain;
    } catch (const Error&) {
      continue;
    }
    if (reg != target) continue;
    ++info.match_count;
    if (!info.top_rank) info.top_rank = static_cast<int>(i + 1);
  }
  info.present_in_index = info.match_count > 0;
  return info;
}

/// Result links of a custom-search style response: {"items": [{"link": ...}]}.
inline std::vector<std::string> search_result_links(const nlohmann::json& response) {
  std::vector<std::string> links;
  if (!response.is_object() || !response.contains("items")) return links;
  for (const auto& item : response.at("items")) {
    if (item.contains("link") && item.at("link").is_string()) links.push_back(item.at("link").get<std::string>());
  }
  return links;
}

/// Search-index client speaking the custom-search JSON shape:
/// GET <endpoint>?q=<domain>&num=10[&key=...][&cx=...].
class RankClient {
 public:
  RankClient(const NetworkPolicy& policy, std::string endpoint, std::string api_key, std::string engine_id = {},
             std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : policy_(policy),
        endpoint_(HttpEndpoint::parse(endpoint)),
        api_key_(std::move(api_key)),
        engine_id_(std::move(engine_id)),
        timeout_(timeout) {}

  RankInfo query(const std::string& domain, const urlkit::SuffixRules& rules = urlkit::SuffixRules::defaults()) const {
    policy_.require_live("rank query");
    auto client = make_http_client(endpoint_.origin, timeout_);
    httplib::Params params{{"q", domain}, {"num", "10"}};
    if (!api_key_.empty()) params.emplace("key", api_key_);
    if (!engine_id_.empty()) params.emplace("cx", engine_id_);
    auto res = client->Get(endpoint_.path, params, httplib::Headers{});
    if (!res) {
      throw Error(Errc::RankServiceUnavailable, "evidence", "rank: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || (res->status == 403 && detail::contains_icase(res->body, "quota"))) {
      throw Error(Errc::QuotaExceeded, "evidence", "rank: HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error(Errc::RankServiceUnavailable, "evidence", "rank: HTTP " + std::to_string(res->status));
    }
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw Error(Errc::RankServiceUnavailable, "evidence", "rank: invalid JSON");
    return rank_from_results(domain, search_result_links(body), rules);
  }

 private:
  const NetworkPolicy& policy_;
  HttpEndpoint endpoint_;
  std::string api_key_;
  std::string engine_id_;
  std::chrono::milliseconds timeout_;
};

}  // namespace antiphish::evidence
