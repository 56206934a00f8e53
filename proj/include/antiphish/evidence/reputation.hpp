#pragma once

#include <chrono>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "antiphish/evidence/http.hpp"
#include "antiphish/evidence/network.hpp"
#include "antiphish/evidence/types.hpp"

namespace antiphish::evidence {

inline constexpr const char* kReputationSource = "safe-browsing";

/// Verdict from a threat-match lookup response. An empty object means the
/// URL is not listed.
inline ReputationVerdict verdict_from_response(const nlohmann::json& response) {
  ReputationVerdict v;
  v.source = kReputationSource;
  if (!response.is_object() || !response.contains("matches") || response.at("matches").empty()) return v;
  std::set<std::string> types;
  for (const auto& m : response.at("matches")) {
    if (m.contains("threatType") && m.at("threatType").is_string()) types.insert(m.at("threatType").get<std::string>());
  }
  v.flagged = true;
  std::string detail;
  for (const auto& t : types) detail += (detail.empty() ? "" : ",") + t;
  v.detail = detail;
  return v;
}

inline nlohmann::json threat_lookup_request(const std::string& url) {
  return {{"client", {{"clientId", "antiphish"}, {"clientVersion", "0.1.0"}}},
          {"threatInfo",
           {{"threatTypes", {"MALWARE", "SOCIAL_ENGINEERING", "UNWANTED_SOFTWARE", "POTENTIALLY_HARMFUL_APPLICATION"}},
            {"platformTypes", {"ANY_PLATFORM"}},
            {"threatEntryTypes", {"URL"}},
            {"threatEntries", {{{"url", url}}}}}}};
}

/// Threat-listing client: POST <endpoint>[?key=...] with a threatMatches
/// lookup body.
class ReputationClient {
 public:
  ReputationClient(const NetworkPolicy& policy, std::string endpoint, std::string api_key,
                   std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : policy_(policy), endpoint_(HttpEndpoint::parse(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {}

  ReputationVerdict query(const std::string& url) const {
    policy_.require_live("reputation query");
    auto client = make_http_client(endpoint_.origin, timeout_);
    std::string path = endpoint_.path;
    if (!api_key_.empty()) path += (path.find('?') == std::string::npos ? "?key=" : "&key=") + api_key_;
    auto res = client->Post(path, threat_lookup_request(url).dump(), "application/json");
    if (!res) {
      throw Error(Errc::ReputationServiceUnavailable, "evidence", "reputation: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw Error(Errc::ReputationServiceUnavailable, "evidence", "reputation: HTTP " + std::to_string(res->status));
    }
    if (detail::trim(res->body).empty()) return verdict_from_response(nlohmann::json::object());
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw Error(Errc::ReputationServiceUnavailable, "evidence", "reputation: invalid JSON");
    return verdict_from_response(body);
  }

 private:
  const NetworkPolicy& policy_;
  HttpEndpoint endpoint_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

}  // namespace antiphish::evidence
