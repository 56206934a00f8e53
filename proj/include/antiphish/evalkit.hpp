#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/detail/rng.hpp"
#include "antiphish/detail/strings.hpp"
#include "antiphish/error.hpp"
#include "antiphish/featurizer.hpp"
#include "antiphish/lists.hpp"
#include "antiphish/lrmodel.hpp"

namespace antiphish::evalkit {

using evidence::Label;
using featurizer::FeatureVector;

/// Phishing is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  [[nodiscard]] std::uint64_t total() const { return tp + fn + fp + tn; }
  void add(Label truth, Label predicted) {
    if (truth == Label::Phishing) (predicted == Label::Phishing ? tp : fn)++;
    else (predicted == Label::Phishing ? fp : tn)++;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Percentages in [0, 100].
struct EvalReport {
  double accuracy = 0;
  std::optional<double> precision;  // absent when nothing was predicted phishing
  double recall = 0;
  double far = 0;  // phishing classified benign
  double frr = 0;  // benign classified phishing
  std::optional<double> one_minus_precision;
  double one_minus_recall = 0;
  ConfusionMatrix matrix;
  std::string dataset_digest;
};

/// Metrics from a confusion matrix holding both classes.
inline EvalReport report_from_matrix(const ConfusionMatrix& m, std::string dataset_digest = {}) {
  if (m.total() == 0) throw Error(Errc::EmptyDataset, "evalkit", "empty confusion matrix");
  if (m.tp + m.fn == 0 || m.fp + m.tn == 0) {
    throw Error(Errc::SingleClassDataset, "evalkit", "evaluation data needs both classes");
  }
  const auto pct = [](std::uint64_t num, std::uint64_t den) {
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  EvalReport r;
  r.matrix = m;
  r.dataset_digest = std::move(dataset_digest);
  r.accuracy = pct(m.tp + m.tn, m.total());
  if (m.tp + m.fp > 0) {
    r.precision = pct(m.tp, m.tp + m.fp);
    r.one_minus_precision = 100.0 - *r.precision;
  }
  r.recall = pct(m.tp, m.tp + m.fn);
  // fn/(tp+fn) is the complement of recall; computing it as such keeps
  // far + recall at exactly 100.
  r.far = 100.0 - r.recall;
  r.frr = pct(m.fp, m.fp + m.tn);
  r.one_minus_recall = 100.0 - r.recall;
  return r;
}

inline std::string dataset_digest(std::span<const FeatureVector> data) { return lrmodel::dataset_digest(data); }

inline ConfusionMatrix confusion(const lrmodel::LrModel& model, std::span<const FeatureVector> data) {
  ConfusionMatrix m;
  for (const auto& v : data) {
    if (!v.label) throw Error(Errc::UnlabeledRow, "evalkit", "unlabeled row " + v.key);
    m.add(*v.label, lrmodel::predict(model, v).label);
  }
  return m;
}

/// Scores a model at its own threshold.
inline EvalReport evaluate(const lrmodel::LrModel& model, std::span<const FeatureVector> data) {
  return report_from_matrix(confusion(model, data), dataset_digest(data));
}

/// Scores third-party predictions (key -> label) against the dataset.
inline EvalReport evaluate_predictions(std::span<const FeatureVector> data, const std::map<std::string, Label>& predicted) {
  ConfusionMatrix m;
  for (const auto& v : data) {
    if (!v.label) throw Error(Errc::UnlabeledRow, "evalkit", "unlabeled row " + v.key);
    auto it = predicted.find(v.key);
    if (it == predicted.end()) throw Error(Errc::InvalidArgument, "evalkit", "no prediction for key " + v.key);
    m.add(*v.label, it->second);
  }
  return report_from_matrix(m, dataset_digest(data));
}

/// Feature CSV with every row labeled.
inline std::vector<FeatureVector> load_labeled_dataset(const std::filesystem::path& path) {
  try {
    return featurizer::read_feature_csv_file(path, {.require_labels = true});
  } catch (const Error& e) {
    throw Error(e.code(), "evalkit", path.string() + ": " + e.detail());
  }
}

/// Two-column prediction file: key and predicted label, separated by a
/// comma or tab. '#' comments and an optional "key,..." header are skipped.
inline std::map<std::string, Label> parse_predictions(std::string_view text) {
  std::map<std::string, Label> out;
  std::size_t line_no = 0;
  for (const auto& raw_line : detail::split(text, '\n')) {
    ++line_no;
    auto line = detail::trim(raw_line);
    if (line.empty() || line.front() == '#') continue;
    const char sep = line.find('\t') != std::string_view::npos ? '\t' : ',';
    auto cells = detail::split(line, sep);
    if (cells.size() != 2) {
      throw Error(Errc::MalformedCsv, "evalkit", "predictions line " + std::to_string(line_no) + ": expected 2 columns");
    }
    const std::string key(detail::trim(cells[0]));
    if (line_no == 1 && key == "key") continue;
    auto label = evidence::parse_label(cells[1]);
    if (key.empty() || !label) {
      throw Error(Errc::MalformedCsv, "evalkit", "predictions line " + std::to_string(line_no) + ": bad row");
    }
    out[key] = *label;
  }
  return out;
}

inline std::map<std::string, Label> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Split

struct Split {
  std::vector<FeatureVector> train;
  std::vector<FeatureVector> test;
};

/// Stratified split: each class contributes round(fraction * n_class) rows
/// to train, chosen by a seeded shuffle. Both sides keep input order.
inline Split split(std::span<const FeatureVector> data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "evalkit", "train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> by_class[3];  // benign, phishing, unlabeled
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& l = data[i].label;
    by_class[!l ? 2 : (*l == Label::Phishing ? 1 : 0)].push_back(i);
  }
  detail::Rng rng(seed);
  std::vector<bool> in_train(data.size(), false);
  for (auto& members : by_class) {
    rng.shuffle(members);
    const auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < k && j < members.size(); ++j) in_train[members[j]] = true;
  }
  Split s;
  for (std::size_t i = 0; i < data.size(); ++i) (in_train[i] ? s.train : s.test).push_back(data[i]);
  if (s.train.empty() || s.test.empty()) {
    throw Error(Errc::TooSmall, "evalkit",
                std::to_string(data.size()) + " rows cannot be split at fraction " + detail::format_double(train_fraction));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output

inline std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

/// Aligned table: one row per method, percentages to one decimal.
inline std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t width = 6;
  for (const auto& [name, _] : rows) width = std::max(width, name.size());
  std::string out;
  char buf[256];
  const auto w = static_cast<int>(width);
  std::snprintf(buf, sizeof(buf), "%-*s %8s %8s %8s %8s %8s %8s %8s\n", w, "Method", "Acc", "Prec", "Rec", "FAR",
                "FRR", "1-Prec", "1-Rec");
  out += buf;
  for (const auto& [name, r] : rows) {
    const auto opt = [](const std::optional<double>& v) { return v ? fixed1(*v) : std::string("n/a"); };
    std::snprintf(buf, sizeof(buf), "%-*s %8s %8s %8s %8s %8s %8s %8s\n", w, name.c_str(), fixed1(r.accuracy).c_str(),
                  opt(r.precision).c_str(), fixed1(r.recall).c_str(), fixed1(r.far).c_str(), fixed1(r.frr).c_str(),
                  opt(r.one_minus_precision).c_str(), fixed1(r.one_minus_recall).c_str());
    out += buf;
  }
  for (const auto& [name, r] : rows) {
    const auto& m = r.matrix;
    std::snprintf(buf, sizeof(buf), "%-*s tp=%llu fn=%llu fp=%llu tn=%llu\n", w, name.c_str(),
                  static_cast<unsigned long long>(m.tp), static_cast<unsigned long long>(m.fn),
                  static_cast<unsigned long long>(m.fp), static_cast<unsigned long long>(m.tn));
    out += buf;
  }
  return out;
}

inline nlohmann::json report_json(const EvalReport& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"accuracy", r.accuracy},
          {"precision", opt(r.precision)},
          {"recall", r.recall},
          {"far", r.far},
          {"frr", r.frr},
          {"one_minus_precision", opt(r.one_minus_precision)},
          {"one_minus_recall", r.one_minus_recall},
          {"confusion_matrix", {{"tp", r.matrix.tp}, {"fn", r.matrix.fn}, {"fp", r.matrix.fp}, {"tn", r.matrix.tn}}},
          {"dataset_digest", r.dataset_digest},
          {"positive_class", "phishing"}};
}

}  // namespace antiphish::evalkit
