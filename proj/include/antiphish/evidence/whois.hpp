#pragma once

#include <array>
#include <chrono>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "antiphish/detail/strings.hpp"
#include "antiphish/error.hpp"
#include "antiphish/evidence/network.hpp"
#include "antiphish/evidence/types.hpp"

namespace antiphish::evidence {

/// Registrar tags that carry the domain creation date, highest priority
/// first.
inline std::vector<std::string> default_creation_tags() {
  return {"Creation Date", "Registration Time", "Registered Date", "Commencement Date",
          "Changed Date",  "Registered On",     "Created On"};
}

/// Parses the leading date of `value` in one of: ISO 8601 (YYYY-MM-DD with
/// optional time), DD-Mon-YYYY, YYYY.MM.DD, DD/MM/YYYY.
inline std::optional<Date> parse_whois_date(std::string_view value) {
  static const std::regex iso(R"(^(\d{4})-(\d{2})-(\d{2})(?:$|[T\s].*))");
  static const std::regex dmy_mon(R"(^(\d{1,2})-([A-Za-z]{3})-(\d{4})(?:$|\s.*))");
  static const std::regex ymd_dot(R"(^(\d{4})\.(\d{2})\.(\d{2})(?:$|\s.*))");
  static const std::regex dmy_slash(R"(^(\d{1,2})/(\d{1,2})/(\d{4})(?:$|\s.*))");
  static constexpr std::array<std::string_view, 12> kMonths{"jan", "feb", "mar", "apr", "may", "jun",
                                                           "jul", "aug", "sep", "oct", "nov", "dec"};
  const std::string v(detail::trim(value));
  std::smatch m;
  if (std::regex_match(v, m, iso)) {
    return make_date(std::stoi(m[1]), static_cast<unsigned>(std::stoi(m[2])), static_cast<unsigned>(std::stoi(m[3])));
  }
  if (std::regex_match(v, m, dmy_mon)) {
    const auto mon = detail::to_lower(m[2].str());
    for (std::size_t i = 0; i < kMonths.size(); ++i) {
      if (mon == kMonths[i]) {
        return make_date(std::stoi(m[3]), static_cast<unsigned>(i + 1), static_cast<unsigned>(std::stoi(m[1])));
      }
    }
    return std::nullopt;
  }
  if (std::regex_match(v, m, ymd_dot)) {
    return make_date(std::stoi(m[1]), static_cast<unsigned>(std::stoi(m[2])), static_cast<unsigned>(std::stoi(m[3])));
  }
  if (std::regex_match(v, m, dmy_slash)) {
    return make_date(std::stoi(m[3]), static_cast<unsigned>(std::stoi(m[2])), static_cast<unsigned>(std::stoi(m[1])));
  }
  return std::nullopt;
}

struct CreationDateMatch {
  Date date;
  std::string matched_tag;
};

struct CreationDateParse {
  std::optional<CreationDateMatch> match;
  std::vector<std::string> warnings;  // "UnparseableDate: ..." entries
};

/// Scans for "<tag>:" lines in tag priority order and returns the first
/// value that parses as a date. Values that fail to parse are reported as
/// warnings and scanning continues.
inline CreationDateParse parse_creation_date(std::string_view raw, const std::vector<std::string>& tags) {
  if (tags.empty()) throw Error(Errc::InvalidArgument, "evidence", "no creation-date tags");
  CreationDateParse out;
  const auto lines = detail::split(raw, '\n');
  for (const auto& tag : tags) {
    for (const auto& raw_line : lines) {
      std::string_view line = detail::trim(raw_line);
      if (!detail::starts_with_icase(line, tag)) continue;
      std::string_view rest = line.substr(tag.size());
      while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
      if (rest.empty() || rest.front() != ':') continue;
      rest.remove_prefix(1);
      if (auto date = parse_whois_date(rest)) {
        out.match = CreationDateMatch{*date, tag};
        return out;
      }
      out.warnings.push_back("UnparseableDate: " + tag + ": '" + std::string(detail::trim(rest)) + "'");
    }
  }
  return out;
}

namespace detail_whois {

inline bool looks_like_no_record(std::string_view raw) {
  const auto t = detail::trim(raw);
  if (t.empty()) return true;
  for (const char* marker : {"no match for", "not found", "no data found", "no entries found", "domain not found",
                             "status: free", "no object found"}) {
    if (detail::contains_icase(t.substr(0, 512), marker)) return true;
  }
  return false;
}

inline std::optional<std::string> referral(std::string_view raw) {
  for (const auto& line : detail::split(raw, '\n')) {
    auto l = detail::trim(line);
    for (const char* key : {"refer:", "whois:"}) {
      if (detail::starts_with_icase(l, key)) {
        auto host = detail::trim(l.substr(std::string_view(key).size()));
        if (!host.empty()) return std::string(host);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail_whois

inline WhoisRecord whois_record_from_raw(std::string raw, const std::vector<std::string>& tags) {
  WhoisRecord rec;
  auto parsed = parse_creation_date(raw, tags);
  rec.raw = std::move(raw);
  if (parsed.match) {
    rec.creation_date = parsed.match->date;
    rec.matched_tag = parsed.match->matched_tag;
  }
  rec.warnings = std::move(parsed.warnings);
  return rec;
}

struct WhoisEndpoint {
  std::string host = "whois.iana.org";
  int port = 43;
  bool follow_referral = true;
  int referral_port = 43;
};

/// Port-43 WHOIS client: one query line, response read to EOF, with one
/// referral hop (IANA answers with "refer:" for the registry server).
class WhoisClient {
 public:
  WhoisClient(const NetworkPolicy& policy, WhoisEndpoint endpoint,
              std::chrono::milliseconds timeout = std::chrono::seconds(10),
              std::vector<std::string> tags = default_creation_tags())
      : policy_(policy), endpoint_(std::move(endpoint)), timeout_(timeout), tags_(std::move(tags)) {}

  WhoisRecord query(const std::string& domain) const {
    policy_.require_live("whois query");
    std::string raw = exchange(endpoint_.host, endpoint_.port, domain);
    if (endpoint_.follow_referral) {
      if (auto next = detail_whois::referral(raw); next && *next != endpoint_.host) {
        raw = exchange(*next, endpoint_.referral_port, domain);
      }
    }
    if (detail_whois::looks_like_no_record(raw)) throw Error(Errc::NoRecord, "evidence", "whois: " + domain);
    return whois_record_from_raw(std::move(raw), tags_);
  }

 private:
  std::string exchange(const std::string& host, int port, const std::string& domain) const {
    try {
      return tcp_exchange(host, port, domain + "\r\n", timeout_);
    } catch (const TcpFailure& f) {
      throw Error(Errc::WhoisUnavailable, "evidence", host + ": " + f.detail);
    }
  }

  const NetworkPolicy& policy_;
  WhoisEndpoint endpoint_;
  std::chrono::milliseconds timeout_;
  std::vector<std::string> tags_;
};

}  // namespace antiphish::evidence
