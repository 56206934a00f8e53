#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/detail/strings.hpp"
#include "antiphish/error.hpp"

namespace antiphish::evidence {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return format_date(day) + buf;
}

inline std::optional<Date> make_date(int y, unsigned m, unsigned d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

/// Parses "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SSZ".
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  int y = 0, h = 0, mi = 0, se = 0;
  unsigned mo = 0, d = 0;
  const std::string str(s);
  char tail = 0;
  if (std::sscanf(str.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &se, &tail) == 7 && tail == 'Z') {
    auto date = make_date(y, mo, d);
    if (!date || h > 23 || mi > 59 || se > 60) return std::nullopt;
    return Timestamp{*date} + std::chrono::hours{h} + std::chrono::minutes{mi} + std::chrono::seconds{se};
  }
  if (str.size() == 10 && std::sscanf(str.c_str(), "%4d-%2u-%2u", &y, &mo, &d) == 3) {
    auto date = make_date(y, mo, d);
    if (date) return Timestamp{*date};
  }
  return std::nullopt;
}

enum class Label { Benign = 0, Phishing = 1 };

inline std::string_view label_name(Label l) { return l == Label::Phishing ? "phishing" : "benign"; }

inline std::optional<Label> parse_label(std::string_view s) {
  const auto t = detail::to_lower(detail::trim(s));
  if (t == "phishing" || t == "1" || t == "phish") return Label::Phishing;
  if (t == "benign" || t == "0") return Label::Benign;
  return std::nullopt;
}

/// The page as first fetched and as rendered.
struct PageSnapshot {
  std::string url_initial;
  std::string url_final;
  int http_status = 0;
  std::string html_initial;
  std::optional<std::string> html_rendered;
  Timestamp fetched_at{};

  /// Rendered HTML when available, else the initial body.
  [[nodiscard]] const std::string& effective_html() const { return html_rendered ? *html_rendered : html_initial; }

  bool operator==(const PageSnapshot&) const = default;
};

struct WhoisRecord {
  std::string raw;
  std::optional<Date> creation_date;
  std::optional<std::string> matched_tag;
  std::vector<std::string> warnings;

  bool operator==(const WhoisRecord&) const = default;
};

struct RankInfo {
  bool present_in_index = false;
  std::optional<int> top_rank;
  int match_count = 0;

  bool operator==(const RankInfo&) const = default;
};

struct ReputationVerdict {
  bool flagged = false;
  std::string source;
  std::optional<std::string> detail;

  bool operator==(const ReputationVerdict&) const = default;
};

/// Optional evidence that always says why it is missing.
template <typename T>
struct Recorded {
  std::optional<T> value;
  std::string absent_reason;

  static Recorded present(T v) { return {std::move(v), {}}; }
  static Recorded absent(std::string why) { return {std::nullopt, std::move(why)}; }

  [[nodiscard]] bool has_value() const { return value.has_value(); }

  bool operator==(const Recorded&) const = default;
};

struct EvidenceBundle {
  PageSnapshot snapshot;
  Recorded<WhoisRecord> whois = Recorded<WhoisRecord>::absent("not queried");
  Recorded<RankInfo> rank = Recorded<RankInfo>::absent("not queried");
  /// Verdict for the final URL; this one feeds the features.
  Recorded<ReputationVerdict> reputation = Recorded<ReputationVerdict>::absent("not queried");
  Recorded<ReputationVerdict> reputation_initial = Recorded<ReputationVerdict>::absent("not queried");
  std::optional<Label> label;
  std::vector<std::string> notes;

  bool operator==(const EvidenceBundle&) const = default;
};

// JSON mapping. Field names are part of the replay-store format.

inline void to_json(nlohmann::json& j, const PageSnapshot& s) {
  j = {{"url_initial", s.url_initial},
       {"url_final", s.url_final},
       {"http_status", s.http_status},
       {"html_initial", s.html_initial},
       {"html_rendered", s.html_rendered ? nlohmann::json(*s.html_rendered) : nlohmann::json(nullptr)},
       {"fetched_at", format_timestamp(s.fetched_at)}};
}

inline void from_json(const nlohmann::json& j, PageSnapshot& s) {
  j.at("url_initial").get_to(s.url_initial);
  j.at("url_final").get_to(s.url_final);
  j.at("http_status").get_to(s.http_status);
  j.at("html_initial").get_to(s.html_initial);
  const auto& r = j.at("html_rendered");
  s.html_rendered = r.is_null() ? std::nullopt : std::optional<std::string>(r.get<std::string>());
  auto ts = parse_timestamp(j.at("fetched_at").get<std::string>());
  if (!ts) throw Error(Errc::StoreCorrupt, "evidence", "bad fetched_at");
  s.fetched_at = *ts;
}

inline void to_json(nlohmann::json& j, const WhoisRecord& w) {
  j = {{"raw", w.raw},
       {"creation_date", w.creation_date ? nlohmann::json(format_date(*w.creation_date)) : nlohmann::json(nullptr)},
       {"matched_tag", w.matched_tag ? nlohmann::json(*w.matched_tag) : nlohmann::json(nullptr)},
       {"warnings", w.warnings}};
}

inline void from_json(const nlohmann::json& j, WhoisRecord& w) {
  j.at("raw").get_to(w.raw);
  w.creation_date.reset();
  if (!j.at("creation_date").is_null()) {
    auto ts = parse_timestamp(j.at("creation_date").get<std::string>());
    if (!ts) throw Error(Errc::StoreCorrupt, "evidence", "bad creation_date");
    w.creation_date = std::chrono::floor<std::chrono::days>(*ts);
  }
  const auto& tag = j.at("matched_tag");
  w.matched_tag = tag.is_null() ? std::nullopt : std::optional<std::string>(tag.get<std::string>());
  j.at("warnings").get_to(w.warnings);
}

inline void to_json(nlohmann::json& j, const RankInfo& r) {
  j = {{"present_in_index", r.present_in_index},
       {"top_rank", r.top_rank ? nlohmann::json(*r.top_rank) : nlohmann::json(nullptr)},
       {"match_count", r.match_count}};
}

inline void from_json(const nlohmann::json& j, RankInfo& r) {
  j.at("present_in_index").get_to(r.present_in_index);
  const auto& t = j.at("top_rank");
  r.top_rank = t.is_null() ? std::nullopt : std::optional<int>(t.get<int>());
  j.at("match_count").get_to(r.match_count);
}

inline void to_json(nlohmann::json& j, const ReputationVerdict& v) {
  j = {{"flagged", v.flagged},
       {"source", v.source},
       {"detail", v.detail ? nlohmann::json(*v.detail) : nlohmann::json(nullptr)}};
}

inline void from_json(const nlohmann::json& j, ReputationVerdict& v) {
  j.at("flagged").get_to(v.flagged);
  j.at("source").get_to(v.source);
  const auto& d = j.at("detail");
  v.detail = d.is_null() ? std::nullopt : std::optional<std::string>(d.get<std::string>());
}

template <typename T>
void to_json(nlohmann::json& j, const Recorded<T>& r) {
  j = {{"value", r.value ? nlohmann::json(*r.value) : nlohmann::json(nullptr)}, {"absent_reason", r.absent_reason}};
}

template <typename T>
void from_json(const nlohmann::json& j, Recorded<T>& r) {
  const auto& v = j.at("value");
  r.value = v.is_null() ? std::nullopt : std::optional<T>(v.get<T>());
  j.at("absent_reason").get_to(r.absent_reason);
}

inline void to_json(nlohmann::json& j, const EvidenceBundle& b) {
  j = {{"snapshot", b.snapshot},
       {"whois", b.whois},
       {"rank", b.rank},
       {"reputation", b.reputation},
       {"reputation_initial", b.reputation_initial},
       {"label", b.label ? nlohmann::json(std::string(label_name(*b.label))) : nlohmann::json(nullptr)},
       {"notes", b.notes}};
}

inline void from_json(const nlohmann::json& j, EvidenceBundle& b) {
  j.at("snapshot").get_to(b.snapshot);
  j.at("whois").get_to(b.whois);
  j.at("rank").get_to(b.rank);
  j.at("reputation").get_to(b.reputation);
  j.at("reputation_initial").get_to(b.reputation_initial);
  b.label.reset();
  if (!j.at("label").is_null()) {
    b.label = parse_label(j.at("label").get<std::string>());
    if (!b.label) throw Error(Errc::StoreCorrupt, "evidence", "bad label");
  }
  j.at("notes").get_to(b.notes);
}

/// Checks the structural invariants of a bundle; returns a description of
/// the first violation, or nothing.
inline std::optional<std::string> check_invariants(const EvidenceBundle& b) {
  const auto& s = b.snapshot;
  if (s.url_initial.empty()) return "url_initial empty";
  if (!s.html_rendered && s.url_final != s.url_initial) return "url_final differs without rendering";
  if (b.whois.value && b.whois.value->creation_date) {
    const auto& tag = b.whois.value->matched_tag;
    if (!tag || !detail::contains_icase(b.whois.value->raw, *tag)) return "creation_date without matching tag";
  }
  if (b.rank.value) {
    const auto& r = *b.rank.value;
    if (!r.present_in_index && (r.top_rank || r.match_count != 0)) return "rank present fields while absent";
    if (r.match_count < 0 || r.match_count > 10) return "match_count out of range";
    if (r.top_rank && *r.top_rank < 1) return "top_rank not positive";
  }
  for (const auto* rep : {&b.reputation, &b.reputation_initial}) {
    if (rep->value && rep->value->source.empty()) return "reputation source empty";
  }
  if (!b.whois.value && b.whois.absent_reason.empty()) return "whois absent without reason";
  if (!b.rank.value && b.rank.absent_reason.empty()) return "rank absent without reason";
  if (!b.reputation.value && b.reputation.absent_reason.empty()) return "reputation absent without reason";
  return std::nullopt;
}

}  // namespace antiphish::evidence
