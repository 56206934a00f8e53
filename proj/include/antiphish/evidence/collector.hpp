#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "antiphish/evidence/http.hpp"
#include "antiphish/evidence/network.hpp"
#include "antiphish/evidence/rank.hpp"
#include "antiphish/evidence/renderer.hpp"
#include "antiphish/evidence/reputation.hpp"
#include "antiphish/evidence/store.hpp"
#include "antiphish/evidence/types.hpp"
#include "antiphish/evidence/whois.hpp"
#include "antiphish/urlkit.hpp"

namespace antiphish::evidence {

inline constexpr const char* kDefaultRankEndpoint = "https://www.googleapis.com/customsearch/v1";
inline constexpr const char* kDefaultReputationEndpoint = "https://safebrowsing.googleapis.com/v4/threatMatches:find";

struct CollectorConfig {
  /// Empty disables rendering; snapshots then carry only the raw body.
  std::string renderer_endpoint;
  std::optional<WhoisEndpoint> whois = WhoisEndpoint{};
  /// Empty endpoint means the service is not configured (recorded as absent).
  std::string rank_endpoint;
  std::string rank_api_key;
  std::string rank_engine_id;
  std::string reputation_endpoint;
  std::string reputation_api_key;
  std::chrono::milliseconds timeout = std::chrono::seconds(10);
  RenderSettings render;
  std::vector<std::string> whois_tags = default_creation_tags();
  urlkit::SuffixRules rules = urlkit::SuffixRules::defaults();
  std::chrono::milliseconds whois_interval = std::chrono::milliseconds(500);
  std::chrono::milliseconds rank_interval = std::chrono::milliseconds(200);
  std::chrono::milliseconds reputation_interval = std::chrono::milliseconds(100);

  /// Endpoints and keys from the environment: RENDERER_URL, WHOIS_SERVER,
  /// RANK_ENDPOINT, RANK_API_KEY, RANK_ENGINE_ID, REPUTATION_ENDPOINT,
  /// REPUTATION_API_KEY. A public endpoint without its key stays unset.
  static CollectorConfig from_env() {
    CollectorConfig c;
    if (auto v = env_value("RENDERER_URL")) c.renderer_endpoint = *v;
    if (auto v = env_value("WHOIS_SERVER")) c.whois->host = *v;
    c.rank_api_key = env_value("RANK_API_KEY").value_or("");
    c.rank_engine_id = env_value("RANK_ENGINE_ID").value_or("");
    if (auto v = env_value("RANK_ENDPOINT")) c.rank_endpoint = *v;
    else if (!c.rank_api_key.empty()) c.rank_endpoint = kDefaultRankEndpoint;
    c.reputation_api_key = env_value("REPUTATION_API_KEY").value_or("");
    if (auto v = env_value("REPUTATION_ENDPOINT")) c.reputation_endpoint = *v;
    else if (!c.reputation_api_key.empty()) c.reputation_endpoint = kDefaultReputationEndpoint;
    return c;
  }
};

struct UrlJob {
  std::string url;
  std::optional<Label> label;
};

/// Result for one URL: either a bundle (possibly with absent parts) or the
/// error that prevented a snapshot.
struct CollectOutcome {
  std::string url;
  std::optional<EvidenceBundle> bundle;
  std::optional<Error> error;
};

/// Gathers all evidence for a URL. Safe for concurrent use: every call opens
/// its own connections and the per-service limiters are shared.
class Collector {
 public:
  Collector(const NetworkPolicy& policy, CollectorConfig config)
      : policy_(policy),
        config_(std::move(config)),
        whois_limit_(config_.whois_interval),
        rank_limit_(config_.rank_interval),
        reputation_limit_(config_.reputation_interval) {}

  [[nodiscard]] const CollectorConfig& config() const { return config_; }

  EvidenceBundle collect(const std::string& url, std::optional<Label> label = std::nullopt) {
    policy_.require_live("evidence collection");
    const auto parts = urlkit::parse_url(url, config_.rules);
    EvidenceBundle bundle;
    bundle.label = label;
    try {
      bundle.snapshot = fetch_snapshot(policy_, url, config_.renderer_endpoint, config_.timeout, config_.render);
    } catch (const HttpStatusError& e) {
      bundle.snapshot = e.snapshot();
      bundle.notes.push_back(std::string("HttpError: ") + e.what());
    }

    bundle.whois = whois_for(parts);
    bundle.rank = rank_for(parts);
    bundle.reputation = reputation_for(bundle.snapshot.url_final);
    bundle.reputation_initial = reputation_for(bundle.snapshot.url_initial);
    return bundle;
  }

 private:
  static std::string reason(const Error& e) { return std::string(errc_name(e.code())) + ": " + e.what(); }

  Recorded<WhoisRecord> whois_for(const urlkit::DomainParts& parts) {
    if (!config_.whois) return Recorded<WhoisRecord>::absent("whois not configured");
    if (urlkit::is_ip_host(parts.host)) return Recorded<WhoisRecord>::absent("ip host has no registrable domain");
    whois_limit_.acquire();
    try {
      WhoisClient client(policy_, *config_.whois, config_.timeout, config_.whois_tags);
      return Recorded<WhoisRecord>::present(client.query(parts.registrable_domain));
    } catch (const Error& e) {
      if (e.code() == Errc::NetworkDisabled) throw;
      return Recorded<WhoisRecord>::absent(reason(e));
    }
  }

  Recorded<RankInfo> rank_for(const urlkit::DomainParts& parts) {
    if (config_.rank_endpoint.empty()) return Recorded<RankInfo>::absent("rank service not configured (RANK_API_KEY unset)");
    rank_limit_.acquire();
    try {
      RankClient client(policy_, config_.rank_endpoint, config_.rank_api_key, config_.rank_engine_id, config_.timeout);
      return Recorded<RankInfo>::present(client.query(parts.registrable_domain, config_.rules));
    } catch (const Error& e) {
      if (e.code() == Errc::NetworkDisabled) throw;
      return Recorded<RankInfo>::absent(reason(e));
    }
  }

  Recorded<ReputationVerdict> reputation_for(const std::string& url) {
    if (config_.reputation_endpoint.empty()) {
      return Recorded<ReputationVerdict>::absent("reputation service not configured (REPUTATION_API_KEY unset)");
    }
    reputation_limit_.acquire();
    try {
      ReputationClient client(policy_, config_.reputation_endpoint, config_.reputation_api_key, config_.timeout);
      return Recorded<ReputationVerdict>::present(client.query(url));
    } catch (const Error& e) {
      if (e.code() == Errc::NetworkDisabled) throw;
      return Recorded<ReputationVerdict>::absent(reason(e));
    }
  }

  const NetworkPolicy& policy_;
  CollectorConfig config_;
  RateLimiter whois_limit_;
  RateLimiter rank_limit_;
  RateLimiter reputation_limit_;
};

/// Runs `work` over every job with at most `workers` threads. Results keep
/// the job order regardless of completion order.
inline std::vector<CollectOutcome> run_pool(const std::vector<UrlJob>& jobs, unsigned workers,
                                            const std::function<EvidenceBundle(const UrlJob&)>& work) {
  std::vector<CollectOutcome> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      results[i].url = jobs[i].url;
      try {
        results[i].bundle = work(jobs[i]);
      } catch (const Error& e) {
        results[i].error = e;
      } catch (const std::exception& e) {
        results[i].error = Error(Errc::Io, "evidence", e.what());
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  return results;
}

/// Live mode: collects and records each URL. Replay mode: loads each URL
/// from the store (NotRecorded for misses) without touching the network.
inline std::vector<CollectOutcome> fetch_all(const NetworkPolicy& policy, Collector& collector, ReplayStore& store,
                                             const std::vector<UrlJob>& jobs, unsigned workers = 4) {
  if (policy.mode() == Mode::Replay) {
    return run_pool(jobs, workers, [&](const UrlJob& job) { return store.load(job.url); });
  }
  return run_pool(jobs, workers, [&](const UrlJob& job) {
    auto bundle = collector.collect(job.url, job.label);
    store.store(bundle);
    return bundle;
  });
}

}  // namespace antiphish::evidence
