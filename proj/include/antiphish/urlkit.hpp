#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/detail/strings.hpp"
#include "antiphish/error.hpp"

namespace antiphish::urlkit {

/// Multi-label public suffixes that override the default "last label is
/// the suffix" rule. Entries are stored lowercased without leading dots.
class SuffixRules {
 public:
  SuffixRules() = default;
  explicit SuffixRules(const std::vector<std::string>& entries) {
    for (const auto& e : entries) add(e);
  }

  static SuffixRules defaults() {
    return SuffixRules({"co.uk", "com.au", "co.nz", "co.vu", "com.br", "co.jp"});
  }

  void add(std::string_view entry) {
    auto e = detail::to_lower(detail::trim(entry));
    while (!e.empty() && e.front() == '.') e.erase(e.begin());
    if (!e.empty()) suffixes_.insert(e);
  }

  /// Number of labels of the longest rule matching the end of host_labels,
  /// or 1 (default rule) when nothing matches. Never consumes every label.
  [[nodiscard]] std::size_t suffix_label_count(const std::vector<std::string>& host_labels) const {
    std::size_t best = 1;
    for (std::size_t k = 2; k < host_labels.size(); ++k) {
      std::vector<std::string> tail(host_labels.end() - static_cast<std::ptrdiff_t>(k),
                                    host_labels.end());
      if (suffixes_.count(detail::join(tail, "."))) best = k;
    }
    return best;
  }

  [[nodiscard]] const std::set<std::string>& entries() const { return suffixes_; }

 private:
  std::set<std::string> suffixes_;
};

struct DomainParts {
  std::string raw;
  std::string scheme;
  std::string userinfo;
  std::string host;
  std::string port;
  std::vector<std::string> host_labels;
  std::string registrable_domain;
  std::string registrable_label;
  std::vector<std::string> subdomain_labels;
  std::string path_and_query;

  bool operator==(const DomainParts&) const = default;
};

inline void to_json(nlohmann::json& j, const DomainParts& p) {
  j = nlohmann::json{{"raw", p.raw},
                     {"scheme", p.scheme},
                     {"userinfo", p.userinfo},
                     {"host", p.host},
                     {"port", p.port},
                     {"host_labels", p.host_labels},
                     {"registrable_domain", p.registrable_domain},
                     {"registrable_label", p.registrable_label},
                     {"subdomain_labels", p.subdomain_labels},
                     {"path_and_query", p.path_and_query}};
}

inline void from_json(const nlohmann::json& j, DomainParts& p) {
  j.at("raw").get_to(p.raw);
  j.at("scheme").get_to(p.scheme);
  j.at("userinfo").get_to(p.userinfo);
  j.at("host").get_to(p.host);
  j.at("port").get_to(p.port);
  j.at("host_labels").get_to(p.host_labels);
  j.at("registrable_domain").get_to(p.registrable_domain);
  j.at("registrable_label").get_to(p.registrable_label);
  j.at("subdomain_labels").get_to(p.subdomain_labels);
  j.at("path_and_query").get_to(p.path_and_query);
}

/// Dotted-quad IPv4 with every octet in 0-255.
inline bool is_ipv4(std::string_view host) {
  auto octets = detail::split(host, '.');
  if (octets.size() != 4) return false;
  for (const auto& o : octets) {
    if (o.empty() || o.size() > 3) return false;
    if (!std::all_of(o.begin(), o.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
    if (std::stoi(o) > 255) return false;
  }
  return true;
}

inline bool is_bracketed_ipv6(std::string_view host) {
  if (host.size() < 4 || host.front() != '[' || host.back() != ']') return false;
  auto inner = host.substr(1, host.size() - 2);
  if (inner.find(':') == std::string_view::npos) return false;
  return std::all_of(inner.begin(), inner.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || c == ':' || c == '.';
  });
}

inline bool is_ip_host(std::string_view host) { return is_ipv4(host) || is_bracketed_ipv6(host); }

namespace detail_url {

inline bool valid_label_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || u >= 0x80;
}

inline std::size_t scheme_length(std::string_view raw) {
  auto sep = raw.find("://");
  if (sep == std::string_view::npos || sep == 0) return 0;
  const char first = raw[0];
  if (!((first >= 'a' && first <= 'z') || (first >= 'A' && first <= 'Z'))) return 0;
  for (std::size_t i = 1; i < sep; ++i) {
    const char c = raw[i];
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '+' || c == '-' || c == '.';
    if (!ok) return 0;
  }
  return sep;
}

}  // namespace detail_url

/// Splits a URL into scheme, host and registrable parts. Scheme defaults to
/// "http" when absent and the host is lowercased.
inline DomainParts parse_url(std::string_view raw, const SuffixRules& rules = SuffixRules::defaults()) {
  const auto malformed = [&](const std::string& why) {
    return Error(Errc::MalformedUrl, "urlkit", why + ": '" + std::string(raw) + "'");
  };
  if (raw.empty()) throw malformed("empty url");

  DomainParts parts;
  parts.raw = std::string(raw);

  std::string_view rest = raw;
  if (auto len = detail_url::scheme_length(raw); len > 0) {
    parts.scheme = detail::to_lower(raw.substr(0, len));
    rest = raw.substr(len + 3);
  } else {
    parts.scheme = "http";
  }

  const auto authority_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, authority_end);
  parts.path_and_query = authority_end == std::string_view::npos ? "" : std::string(rest.substr(authority_end));

  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    parts.userinfo = std::string(authority.substr(0, at));
    authority = authority.substr(at + 1);
  }

  std::string_view host_view;
  std::string_view port_view;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) throw malformed("unterminated IPv6 literal");
    host_view = authority.substr(0, close + 1);
    auto after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') throw malformed("junk after IPv6 literal");
      port_view = after.substr(1);
    }
  } else {
    auto colon = authority.find(':');
    host_view = authority.substr(0, colon);
    if (colon != std::string_view::npos) port_view = authority.substr(colon + 1);
  }
  if (!std::all_of(port_view.begin(), port_view.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw malformed("non-numeric port");
  }
  parts.port = std::string(port_view);

  std::string host = detail::to_lower(host_view);
  if (!host.empty() && host.back() == '.' && host.front() != '[') host.pop_back();
  if (host.empty()) throw malformed("no host");
  parts.host = host;

  if (is_bracketed_ipv6(host)) {
    parts.host_labels = {host};
    parts.registrable_domain = host;
    return parts;
  }
  if (host.front() == '[') throw malformed("invalid IPv6 literal");

  parts.host_labels = detail::split(host, '.');
  for (const auto& label : parts.host_labels) {
    if (label.empty()) throw malformed("empty host label");
    if (!std::all_of(label.begin(), label.end(), detail_url::valid_label_char)) {
      throw malformed("invalid host character");
    }
  }
  if (is_ipv4(host)) {
    parts.registrable_domain = host;
    return parts;
  }

  const std::size_t total = parts.host_labels.size();
  std::size_t suffix_labels = std::min(rules.suffix_label_count(parts.host_labels), total);
  const std::size_t registrable_labels = std::min(suffix_labels + 1, total);
  const std::size_t split_at = total - registrable_labels;
  parts.subdomain_labels.assign(parts.host_labels.begin(),
                                parts.host_labels.begin() + static_cast<std::ptrdiff_t>(split_at));
  std::vector<std::string> reg(parts.host_labels.begin() + static_cast<std::ptrdiff_t>(split_at),
                               parts.host_labels.end());
  parts.registrable_domain = detail::join(reg, ".");
  parts.registrable_label = reg.front();
  return parts;
}

/// Lowercases scheme and host and drops the default scheme ambiguity so two
/// spellings of the same URL map to one string.
inline std::string canonical_url(std::string_view raw, const SuffixRules& rules = SuffixRules::defaults()) {
  const auto trimmed = detail::trim(raw);
  try {
    auto p = parse_url(trimmed, rules);
    std::string out = p.scheme + "://";
    if (!p.userinfo.empty()) out += p.userinfo + "@";
    out += p.host;
    if (!p.port.empty()) out += ":" + p.port;
    out += p.path_and_query.empty() ? "/" : p.path_and_query;
    return out;
  } catch (const Error&) {
    return std::string(trimmed);
  }
}

struct UrlAnalytics {
  bool has_ip_host = false;
  std::size_t suspicious_symbol_count = 0;
  std::size_t subdomain_count = 0;
  std::size_t url_length = 0;
  std::size_t registrable_label_length = 0;

  bool operator==(const UrlAnalytics&) const = default;
};

inline std::size_t count_code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

/// Lexical URL features: IP host, '@'/'-' count over the whole URL,
/// subdomain count, URL length and length of the registrable label.
inline UrlAnalytics url_analytics(const DomainParts& parts) {
  UrlAnalytics a;
  a.has_ip_host = is_ip_host(parts.host);
  a.suspicious_symbol_count = static_cast<std::size_t>(
      std::count_if(parts.raw.begin(), parts.raw.end(), [](char c) { return c == '@' || c == '-'; }));
  a.url_length = count_code_points(parts.raw);
  if (!a.has_ip_host) {
    a.subdomain_count = parts.subdomain_labels.size();
    a.registrable_label_length = count_code_points(parts.registrable_label);
  }
  return a;
}

/// Registrable domains of free-hosting and dynamic-DNS services commonly
/// abused to host phishing pages.
inline std::vector<std::string> default_benign_hosts() {
  return {"sites.google.com", "000webhostapp.com", "ddns.net", "co.vu", "branch.io", "vercel.app"};
}

class BenignHostList {
 public:
  BenignHostList() : BenignHostList(default_benign_hosts()) {}
  explicit BenignHostList(const std::vector<std::string>& entries) {
    for (const auto& e : entries) add(e);
  }

  void add(std::string_view entry) {
    auto e = detail::to_lower(detail::trim(entry));
    while (!e.empty() && e.front() == '.') e.erase(e.begin());
    if (!e.empty()) entries_.insert(e);
  }

  [[nodiscard]] const std::set<std::string>& entries() const { return entries_; }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

  /// Entries with three or more labels (e.g. sites.google.com) act as
  /// public suffixes, so each tenant gets its own registrable domain.
  [[nodiscard]] SuffixRules extend(SuffixRules rules) const {
    for (const auto& e : entries_) {
      if (std::count(e.begin(), e.end(), '.') >= 2) rules.add(e);
    }
    return rules;
  }

 private:
  std::set<std::string> entries_;
};

/// True iff the host is an entry of the list or a subdomain of one.
/// Matching is case-insensitive and only on label boundaries.
inline bool is_benign_host(const DomainParts& parts, const BenignHostList& list) {
  const auto host = detail::to_lower(parts.host);
  for (const auto& entry : list.entries()) {
    if (host == entry) return true;
    if (host.size() > entry.size() && host.ends_with(entry) && host[host.size() - entry.size() - 1] == '.') {
      return true;
    }
  }
  return false;
}

}  // namespace antiphish::urlkit
