#pragma once

#include <algorithm>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/detail/digest.hpp"
#include "antiphish/error.hpp"
#include "antiphish/evidence/types.hpp"
#include "antiphish/lists.hpp"
#include "antiphish/urlkit.hpp"

namespace antiphish::evidence {

inline constexpr const char* kRecorderVersion = "antiphish-recorder/1";

/// Store key: SHA-256 of the canonicalized initial URL, in hex.
inline std::string bundle_key(std::string_view url_initial) {
  return detail::sha256_hex(urlkit::canonical_url(url_initial));
}

inline bool looks_like_key(std::string_view s) {
  return s.size() == 64 &&
         std::all_of(s.begin(), s.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

/// Canonical bundle.json bytes. Keys are sorted, so equal bundles always
/// serialize identically.
inline std::string serialize_bundle(const EvidenceBundle& b) {
  return nlohmann::json(b).dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

inline EvidenceBundle deserialize_bundle(std::string_view bytes) {
  auto j = nlohmann::json::parse(bytes, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::StoreCorrupt, "evidence", "bundle.json is not JSON");
  try {
    return j.get<EvidenceBundle>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::StoreCorrupt, "evidence", std::string("bundle.json: ") + e.what());
  }
}

/// Record/replay store laid out as <root>/<hex key>/{bundle.json,meta.json}.
/// Readers may run concurrently; writes from one process are serialized and
/// land atomically through a rename.
class ReplayStore {
 public:
  explicit ReplayStore(std::filesystem::path root) : root_(std::move(root)) {}

  [[nodiscard]] const std::filesystem::path& root() const { return root_; }

  std::string store(const EvidenceBundle& bundle) {
    const std::string key = bundle_key(bundle.snapshot.url_initial);
    const std::string bytes = serialize_bundle(bundle);
    nlohmann::json meta = {{"recorder_version", kRecorderVersion},
                           {"key", key},
                           {"url_initial", bundle.snapshot.url_initial},
                           {"recorded_at", format_timestamp(bundle.snapshot.fetched_at)},
                           {"checksums", {{"bundle.json", detail::sha256_hex(bytes)}}}};
    std::lock_guard lock(write_mu_);
    const auto dir = root_ / key;
    std::filesystem::create_directories(dir);
    write_atomically(dir / "bundle.json", bytes);
    write_atomically(dir / "meta.json", meta.dump(2) + "\n");
    return key;
  }

  /// Loads by store key or by URL.
  [[nodiscard]] EvidenceBundle load(std::string_view key_or_url) const {
    const std::string key = looks_like_key(key_or_url) ? std::string(key_or_url) : bundle_key(key_or_url);
    const auto dir = root_ / key;
    if (!std::filesystem::exists(dir / "bundle.json")) {
      throw Error(Errc::NotRecorded, "evidence", std::string(key_or_url) + " (key " + key + ")");
    }
    const std::string bytes = read_text_file(dir / "bundle.json");
    if (!std::filesystem::exists(dir / "meta.json")) throw Error(Errc::StoreCorrupt, "evidence", key + ": no meta.json");
    auto meta = nlohmann::json::parse(read_text_file(dir / "meta.json"), nullptr, false);
    if (meta.is_discarded() || !meta.contains("checksums") || !meta.at("checksums").contains("bundle.json")) {
      throw Error(Errc::StoreCorrupt, "evidence", key + ": unreadable meta.json");
    }
    if (meta.at("checksums").at("bundle.json").get<std::string>() != detail::sha256_hex(bytes)) {
      throw Error(Errc::StoreCorrupt, "evidence", key + ": checksum mismatch");
    }
    return deserialize_bundle(bytes);
  }

  [[nodiscard]] bool contains(std::string_view key_or_url) const {
    const std::string key = looks_like_key(key_or_url) ? std::string(key_or_url) : bundle_key(key_or_url);
    return std::filesystem::exists(root_ / key / "bundle.json");
  }

  /// All recorded keys in sorted order.
  [[nodiscard]] std::vector<std::string> keys() const {
    std::vector<std::string> out;
    if (!std::filesystem::exists(root_)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
      const auto name = entry.path().filename().string();
      if (entry.is_directory() && looks_like_key(name) && std::filesystem::exists(entry.path() / "bundle.json")) {
        out.push_back(name);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static void write_atomically(const std::filesystem::path& target, std::string_view data) {
    auto tmp = target;
    tmp += ".tmp";
    write_text_file(tmp, data);
    std::filesystem::rename(tmp, target);
  }

  std::filesystem::path root_;
  std::mutex write_mu_;
};

inline std::string store_bundle(const EvidenceBundle& bundle, const std::filesystem::path& store_root) {
  ReplayStore store(store_root);
  return store.store(bundle);
}

inline EvidenceBundle load_bundle(std::string_view key_or_url, const std::filesystem::path& store_root) {
  return ReplayStore(store_root).load(key_or_url);
}

}  // namespace antiphish::evidence
