#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/detail/strings.hpp"
#include "antiphish/domkit.hpp"
#include "antiphish/error.hpp"
#include "antiphish/evidence/store.hpp"
#include "antiphish/evidence/types.hpp"
#include "antiphish/textmetrics.hpp"
#include "antiphish/urlkit.hpp"

namespace antiphish::featurizer {

using evidence::Label;

inline constexpr std::string_view kFeatureSchemaVersion = "1";
inline constexpr std::size_t kFeatureCount = 13;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "fake_invalid",     "domain_age_days",         "rank_score",  "reputation_flagged", "seeks_input",
    "redirect_distance", "url_content_consistency", "benign_host", "has_ip_host",        "suspicious_symbol_count",
    "subdomain_count",  "url_length",              "registrable_label_length"};

enum class Category { Reputation, Goal, Consistency, Analytics };

/// Zero-based feature index for fN.
constexpr std::size_t idx(int f) { return static_cast<std::size_t>(f - 1); }

constexpr Category category_of(std::size_t i) {
  if (i <= idx(4)) return Category::Reputation;
  if (i <= idx(6)) return Category::Goal;
  if (i <= idx(8)) return Category::Consistency;
  return Category::Analytics;
}

constexpr std::string_view category_name(Category c) {
  switch (c) {
    case Category::Reputation: return "reputation";
    case Category::Goal: return "goal";
    case Category::Consistency: return "consistency";
    case Category::Analytics: return "analytics";
  }
  return "";
}

constexpr bool is_binary(std::size_t i) {
  return i == idx(1) || i == idx(4) || i == idx(7) || i == idx(8) || i == idx(9);
}

/// Features that get z-scored: f2, f5, f6, f10..f13.
constexpr bool is_normalized(std::size_t i) {
  return i == idx(2) || i == idx(5) || i == idx(6) || (i >= idx(10) && i <= idx(13));
}

/// "f1".."f13".
inline std::string short_name(std::size_t i) { return "f" + std::to_string(i + 1); }

struct FeatureVector {
  std::string key;
  std::array<double, kFeatureCount> values{};
  std::optional<Label> label;
  std::vector<std::string> notes;
  bool normalized = false;

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  /// Value of fN (1-based, as in the schema).
  [[nodiscard]] double f(int n) const { return values[idx(n)]; }

  bool operator==(const FeatureVector&) const = default;
};

struct FeatureConfig {
  urlkit::SuffixRules rules = urlkit::SuffixRules::defaults();
  urlkit::BenignHostList benign_hosts;
  domkit::ContentConfig content;
  /// f2 when WHOIS or its creation date is missing.
  double age_imputation_days = 0.0;
  /// When false, f4 is forced to 0 (for comparisons against the same vendor).
  bool use_reputation = true;
};

namespace detail_feat {

inline bool contains_token(std::string_view haystack, std::string_view token) {
  return !token.empty() && detail::contains_icase(haystack, token);
}

}  // namespace detail_feat

/// Correlates one evidence bundle into the 13-feature vector. Pure: equal
/// inputs give equal outputs. Missing evidence is imputed and noted.
inline FeatureVector extract_features(const evidence::EvidenceBundle& bundle, const FeatureConfig& cfg = {}) {
  const auto& snap = bundle.snapshot;
  if (snap.url_initial.empty()) throw Error(Errc::MissingSnapshot, "featurizer", "bundle has no snapshot");
  const auto rules = cfg.benign_hosts.extend(cfg.rules);

  FeatureVector v;
  v.key = evidence::bundle_key(snap.url_initial);
  v.label = bundle.label;

  const std::string& html = snap.effective_html();
  const auto profile = domkit::inspect_content(html, snap.http_status, cfg.content);

  // Reputation
  v[idx(1)] = profile.fake_invalid ? 1.0 : 0.0;

  v[idx(2)] = cfg.age_imputation_days;
  if (!bundle.whois.has_value()) {
    v.notes.push_back("whois absent: " + bundle.whois.absent_reason);
  } else if (!bundle.whois.value->creation_date) {
    v.notes.push_back("whois absent: no creation date");
  } else {
    const auto fetched = std::chrono::floor<std::chrono::days>(snap.fetched_at);
    const auto age = (fetched - *bundle.whois.value->creation_date).count();
    if (age < 0) v.notes.push_back("whois creation date after fetch; age clamped to 0");
    v[idx(2)] = static_cast<double>(std::max<long long>(age, 0));
  }

  if (!bundle.rank.has_value()) {
    v.notes.push_back("rank absent: " + bundle.rank.absent_reason);
  } else if (bundle.rank.value->top_rank) {
    v[idx(3)] = 1.0 / static_cast<double>(*bundle.rank.value->top_rank);
  }

  if (!bundle.reputation.has_value()) {
    v.notes.push_back("reputation absent: " + bundle.reputation.absent_reason);
  } else if (cfg.use_reputation && bundle.reputation.value->flagged) {
    v[idx(4)] = 1.0;
  }

  // Goal
  v[idx(5)] = static_cast<double>(profile.sensitive_inputs());
  v[idx(6)] = static_cast<double>(textmetrics::levenshtein(snap.url_initial, snap.url_final));

  // Consistency
  std::string final_label;
  try {
    final_label = urlkit::parse_url(snap.url_final, rules).registrable_label;
  } catch (const Error&) {
    v.notes.push_back("url_final unparseable");
  }
  if (!final_label.empty()) {
    auto doc = html::parse(html);
    const auto text = domkit::visible_text(doc);
    if (detail_feat::contains_token(profile.title, final_label) || detail_feat::contains_token(text, final_label)) {
      v[idx(7)] = 1.0;
    }
  }

  const auto parts = urlkit::parse_url(snap.url_initial, rules);
  v[idx(8)] = urlkit::is_benign_host(parts, cfg.benign_hosts) ? 1.0 : 0.0;

  // Analytics
  const auto a = urlkit::url_analytics(parts);
  v[idx(9)] = a.has_ip_host ? 1.0 : 0.0;
  v[idx(10)] = static_cast<double>(a.suspicious_symbol_count);
  v[idx(11)] = static_cast<double>(a.subdomain_count);
  v[idx(12)] = static_cast<double>(a.url_length);
  v[idx(13)] = static_cast<double>(a.registrable_label_length);
  return v;
}

/// Structural checks: finite values, exact binaries, ranges.
inline std::optional<std::string> check_invariants(const FeatureVector& v) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!std::isfinite(v[i])) return short_name(i) + " not finite";
    if (!v.normalized && is_binary(i) && v[i] != 0.0 && v[i] != 1.0) return short_name(i) + " not binary";
  }
  if (!v.normalized && (v[idx(3)] < 0.0 || v[idx(3)] > 1.0)) return "f3 outside [0,1]";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Normalization

struct NormStats {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};
  std::size_t fitted_on = 0;
  std::vector<std::string> warnings;

  NormStats() { stddev.fill(1.0); }

  bool operator==(const NormStats&) const = default;
};

/// Mean and sample standard deviation of each z-scored feature. A constant
/// feature gets std 1 and a DegenerateFeature warning.
inline NormStats fit_norm_stats(std::span<const FeatureVector> vectors) {
  if (vectors.size() < 2) throw Error(Errc::TooFewSamples, "featurizer", "norm stats need at least 2 vectors");
  NormStats s;
  s.fitted_on = vectors.size();
  const double n = static_cast<double>(vectors.size());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!is_normalized(i)) continue;
    double sum = 0.0;
    for (const auto& v : vectors) {
      if (v.normalized) throw Error(Errc::AlreadyNormalized, "featurizer", "fit on normalized vector " + v.key);
      sum += v[i];
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& v : vectors) ss += (v[i] - mean) * (v[i] - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) {
      s.warnings.push_back("DegenerateFeature: " + short_name(i) + " (" + std::string(kFeatureNames[i]) +
                           ") constant over fit set; std clamped to 1");
      sd = 1.0;
    }
    s.mean[i] = mean;
    s.stddev[i] = sd;
  }
  return s;
}

/// z-scores the non-binary features. Applying twice is an error.
inline FeatureVector apply_norm(FeatureVector v, const NormStats& s) {
  if (v.normalized) throw Error(Errc::AlreadyNormalized, "featurizer", "vector " + v.key + " already normalized");
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (is_normalized(i)) v[i] = (v[i] - s.mean[i]) / s.stddev[i];
  }
  v.normalized = true;
  return v;
}

inline void to_json(nlohmann::json& j, const NormStats& s) {
  nlohmann::json features = nlohmann::json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (is_normalized(i)) features[short_name(i)] = {{"mean", s.mean[i]}, {"std", s.stddev[i]}};
  }
  j = {{"features", features}, {"fitted_on", s.fitted_on}, {"warnings", s.warnings}};
}

inline void from_json(const nlohmann::json& j, NormStats& s) {
  s = NormStats{};
  const auto& f = j.at("features");
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!is_normalized(i)) continue;
    const auto& e = f.at(short_name(i));
    s.mean[i] = e.at("mean").get<double>();
    s.stddev[i] = e.at("std").get<double>();
  }
  j.at("fitted_on").get_to(s.fitted_on);
  j.at("warnings").get_to(s.warnings);
}

// ---------------------------------------------------------------------------
// Correlation

inline constexpr std::size_t kReportColumns = kFeatureCount + 1;  // features + label

struct CorrelationReport {
  std::size_t samples = 0;
  /// cells[i][j], columns f1..f13 then label. Absent when either column is
  /// constant over the dataset.
  std::array<std::array<std::optional<double>, kReportColumns>, kReportColumns> cells{};
  /// Website age against ranking (f2 vs f3).
  std::optional<double> age_rank;

  static std::string column_name(std::size_t i) { return i < kFeatureCount ? short_name(i) : "label"; }
};

/// Pairwise Pearson coefficients over all features and the label.
inline CorrelationReport correlation_report(std::span<const FeatureVector> vectors) {
  if (vectors.size() < 2) throw Error(Errc::TooFewSamples, "featurizer", "correlation needs at least 2 vectors");
  std::array<std::vector<double>, kReportColumns> cols;
  for (const auto& v : vectors) {
    if (!v.label) throw Error(Errc::UnlabeledRow, "featurizer", "unlabeled vector " + v.key);
    for (std::size_t i = 0; i < kFeatureCount; ++i) cols[i].push_back(v[i]);
    cols[kFeatureCount].push_back(*v.label == Label::Phishing ? 1.0 : 0.0);
  }
  CorrelationReport r;
  r.samples = vectors.size();
  for (std::size_t i = 0; i < kReportColumns; ++i) {
    for (std::size_t j = i; j < kReportColumns; ++j) {
      try {
        const double c = textmetrics::pearson(cols[i], cols[j]).coefficient;
        r.cells[i][j] = c;
        r.cells[j][i] = c;
      } catch (const Error& e) {
        if (e.code() != Errc::ZeroVariance) throw;
      }
    }
  }
  r.age_rank = r.cells[idx(2)][idx(3)];
  return r;
}

inline std::string format_report_text(const CorrelationReport& r) {
  std::ostringstream out;
  out << "samples: " << r.samples << "\n";
  char buf[32];
  out << "      ";
  for (std::size_t j = 0; j < kReportColumns; ++j) {
    std::snprintf(buf, sizeof(buf), "%7s", CorrelationReport::column_name(j).c_str());
    out << buf;
  }
  out << "\n";
  for (std::size_t i = 0; i < kReportColumns; ++i) {
    std::snprintf(buf, sizeof(buf), "%-6s", CorrelationReport::column_name(i).c_str());
    out << buf;
    for (std::size_t j = 0; j < kReportColumns; ++j) {
      if (r.cells[i][j]) std::snprintf(buf, sizeof(buf), "%7.3f", *r.cells[i][j]);
      else std::snprintf(buf, sizeof(buf), "%7s", "n/a");
      out << buf;
    }
    out << "\n";
  }
  out << "age-rank (f2,f3): ";
  if (r.age_rank) {
    std::snprintf(buf, sizeof(buf), "%.4f", *r.age_rank);
    out << buf << "\n";
  } else {
    out << "undefined\n";
  }
  return out.str();
}

inline nlohmann::json report_json(const CorrelationReport& r) {
  nlohmann::json columns = nlohmann::json::array();
  for (std::size_t i = 0; i < kReportColumns; ++i) columns.push_back(CorrelationReport::column_name(i));
  nlohmann::json matrix = nlohmann::json::array();
  for (const auto& row : r.cells) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& c : row) jr.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
    matrix.push_back(jr);
  }
  return {{"samples", r.samples},
          {"columns", columns},
          {"pearson", matrix},
          {"age_rank", r.age_rank ? nlohmann::json(*r.age_rank) : nlohmann::json(nullptr)}};
}

// ---------------------------------------------------------------------------
// Feature CSV: "# feature-schema: N", then "key,f1,...,f13,label", then rows.

inline std::string csv_header() {
  std::string h = "key";
  for (std::size_t i = 0; i < kFeatureCount; ++i) h += "," + short_name(i);
  return h + ",label";
}

inline void write_feature_csv(std::ostream& out, std::span<const FeatureVector> vectors) {
  out << "# feature-schema: " << kFeatureSchemaVersion << "\n" << csv_header() << "\n";
  for (const auto& v : vectors) {
    if (v.normalized) throw Error(Errc::AlreadyNormalized, "featurizer", "CSV holds raw features only");
    if (v.key.find_first_of(",\n\r") != std::string::npos) {
      throw Error(Errc::InvalidArgument, "featurizer", "key contains a separator: " + v.key);
    }
    out << v.key;
    for (double x : v.values) out << ',' << detail::format_double(x);
    out << ',';
    if (v.label) out << (*v.label == Label::Phishing ? '1' : '0');
    out << '\n';
  }
}

inline std::string feature_csv(std::span<const FeatureVector> vectors) {
  std::ostringstream out;
  write_feature_csv(out, vectors);
  return out.str();
}

struct CsvReadOptions {
  bool require_labels = false;
};

inline std::vector<FeatureVector> read_feature_csv(std::istream& in, const CsvReadOptions& opts = {}) {
  std::vector<FeatureVector> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](Errc code, const std::string& what) {
    return Error(code, "featurizer", "line " + std::to_string(line_no) + ": " + what);
  };
  bool header_seen = false;
  std::optional<std::string> schema;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = detail::trim(std::string_view(line).substr(1));
      if (detail::starts_with_icase(body, "feature-schema:")) {
        schema = std::string(detail::trim(body.substr(std::string_view("feature-schema:").size())));
      }
      continue;
    }
    if (!header_seen) {
      if (line != csv_header()) throw fail(Errc::MalformedCsv, "expected header '" + csv_header() + "'");
      if (!schema) throw fail(Errc::SchemaVersionMismatch, "missing feature-schema line");
      if (*schema != kFeatureSchemaVersion) {
        throw fail(Errc::SchemaVersionMismatch,
                   "file schema " + *schema + ", reader schema " + std::string(kFeatureSchemaVersion));
      }
      header_seen = true;
      continue;
    }
    const auto cells = detail::split(line, ',');
    if (cells.size() != kFeatureCount + 2) {
      throw fail(Errc::MalformedCsv, "expected " + std::to_string(kFeatureCount + 2) + " columns, got " +
                                         std::to_string(cells.size()));
    }
    FeatureVector v;
    v.key = cells.front();
    if (v.key.empty()) throw fail(Errc::MalformedCsv, "empty key");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      auto x = detail::parse_double(cells[i + 1]);
      if (!x || !std::isfinite(*x)) throw fail(Errc::MalformedCsv, "bad value for " + short_name(i));
      v[i] = *x;
    }
    const auto label_cell = detail::trim(cells.back());
    if (!label_cell.empty()) {
      v.label = evidence::parse_label(label_cell);
      if (!v.label) throw fail(Errc::MalformedCsv, "bad label '" + std::string(label_cell) + "'");
    } else if (opts.require_labels) {
      throw fail(Errc::UnlabeledRow, "row " + v.key + " has no label");
    }
    out.push_back(std::move(v));
  }
  if (!header_seen) throw Error(Errc::MalformedCsv, "featurizer", "no header row");
  return out;
}

inline std::vector<FeatureVector> read_feature_csv_file(const std::filesystem::path& path,
                                                        const CsvReadOptions& opts = {}) {
  std::istringstream in(read_text_file(path));
  return read_feature_csv(in, opts);
}

}  // namespace antiphish::featurizer
