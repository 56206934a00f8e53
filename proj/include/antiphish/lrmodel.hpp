#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/detail/digest.hpp"
#include "antiphish/error.hpp"
#include "antiphish/featurizer.hpp"
#include "antiphish/lists.hpp"

namespace antiphish::lrmodel {

using featurizer::FeatureVector;
using featurizer::kFeatureCount;
using featurizer::NormStats;

inline constexpr std::size_t kThetaSize = kFeatureCount + 1;
inline constexpr std::string_view kModelFormat = "antiphish-lr-model";
inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kObjective = "binary-cross-entropy";
/// Probabilities inside the loss are clamped to [kProbClamp, 1 - kProbClamp].
inline constexpr double kProbClamp = 1e-12;
/// Consecutive loss increases that abort training.
inline constexpr int kDivergencePatience = 10;

using Theta = std::array<double, kThetaSize>;

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 5000;
  double convergence_tol = 1e-9;
  std::uint64_t seed = 0;
  double l2_penalty = 0.0;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw Error(Errc::InvalidArgument, "lrmodel", "learning_rate must be > 0");
    }
    if (max_epochs < 1) throw Error(Errc::InvalidArgument, "lrmodel", "max_epochs must be >= 1");
    if (!(convergence_tol >= 0.0)) throw Error(Errc::InvalidArgument, "lrmodel", "convergence_tol must be >= 0");
    if (!(l2_penalty >= 0.0)) throw Error(Errc::InvalidArgument, "lrmodel", "l2_penalty must be >= 0");
  }

  bool operator==(const TrainConfig&) const = default;
};

struct LrModel {
  Theta theta{};
  NormStats norm_stats;
  double threshold = 0.5;
  std::string feature_schema_version{featurizer::kFeatureSchemaVersion};
  TrainConfig train_config;
  std::string data_digest;
  std::size_t samples = 0;
  int epochs_run = 0;
  double final_loss = 0.0;
  bool converged = false;

  bool operator==(const LrModel&) const = default;
};

/// Logistic function, evaluated without overflow and kept strictly inside
/// (0, 1).
inline double sigmoid(double z) {
  double p;
  if (z >= 0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(p, lo, hi);
}

inline void require_schema(const LrModel& m) {
  if (m.feature_schema_version != featurizer::kFeatureSchemaVersion) {
    throw Error(Errc::SchemaMismatch, "lrmodel",
                "model schema " + m.feature_schema_version + ", features schema " +
                    std::string(featurizer::kFeatureSchemaVersion));
  }
}

/// theta^T [1, x]
inline double logit(const Theta& theta, const std::array<double, kFeatureCount>& x) {
  double z = theta[0];
  for (std::size_t i = 0; i < kFeatureCount; ++i) z += theta[i + 1] * x[i];
  return z;
}

/// h(x) = 1 / (1 + e^{-theta^T [1, x]}) for a normalized vector.
inline double hypothesis(const LrModel& m, const FeatureVector& x) {
  require_schema(m);
  if (!x.normalized) throw Error(Errc::InvalidArgument, "lrmodel", "hypothesis expects a normalized vector");
  return sigmoid(logit(m.theta, x.values));
}

namespace detail_lr {

inline double target(const FeatureVector& v) {
  if (!v.label) throw Error(Errc::UnlabeledRow, "lrmodel", "unlabeled vector " + v.key);
  return *v.label == evidence::Label::Phishing ? 1.0 : 0.0;
}

inline void require_nonempty(std::span<const FeatureVector> data) {
  if (data.empty()) throw Error(Errc::EmptyDataset, "lrmodel", "dataset is empty");
}

/// log(1 + e^x) without overflow or cancellation.
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// -log(p) for p = sigmoid(z) clamped to [kProbClamp, 1 - kProbClamp],
/// computed in logit space.
inline double neg_log_sigmoid(double z) {
  static const double lo = -std::log1p(-kProbClamp);
  static const double hi = -std::log(kProbClamp);
  return std::clamp(softplus(-z), lo, hi);
}

}  // namespace detail_lr

/// Mean binary cross-entropy plus (lambda / 2m) * sum(theta_1..n ^ 2).
inline double loss(const Theta& theta, std::span<const FeatureVector> data, double l2_penalty = 0.0) {
  detail_lr::require_nonempty(data);
  double sum = 0.0;
  for (const auto& v : data) {
    const double y = detail_lr::target(v);
    const double z = logit(theta, v.values);
    sum += y * detail_lr::neg_log_sigmoid(z) + (1.0 - y) * detail_lr::neg_log_sigmoid(-z);
  }
  const double m = static_cast<double>(data.size());
  double reg = 0.0;
  for (std::size_t j = 1; j < kThetaSize; ++j) reg += theta[j] * theta[j];
  return sum / m + l2_penalty / (2.0 * m) * reg;
}

inline double loss(const LrModel& model, std::span<const FeatureVector> data) {
  require_schema(model);
  return loss(model.theta, data, model.train_config.l2_penalty);
}

/// (1/m) sum (h(x) - y) [1, x] plus (lambda / m) theta_j on j >= 1.
inline Theta gradient(const Theta& theta, std::span<const FeatureVector> data, double l2_penalty = 0.0) {
  detail_lr::require_nonempty(data);
  Theta g{};
  for (const auto& v : data) {
    const double err = sigmoid(logit(theta, v.values)) - detail_lr::target(v);
    g[0] += err;
    for (std::size_t i = 0; i < kFeatureCount; ++i) g[i + 1] += err * v.values[i];
  }
  const double m = static_cast<double>(data.size());
  for (std::size_t j = 0; j < kThetaSize; ++j) {
    g[j] /= m;
    if (j > 0) g[j] += l2_penalty / m * theta[j];
  }
  return g;
}

inline Theta gradient(const LrModel& model, std::span<const FeatureVector> data) {
  require_schema(model);
  return gradient(model.theta, data, model.train_config.l2_penalty);
}

/// Digest identifying a training set: SHA-256 of its feature CSV.
inline std::string dataset_digest(std::span<const FeatureVector> raw) {
  return detail::sha256_hex(featurizer::feature_csv(raw));
}

struct TrainResult {
  LrModel model;
  std::vector<double> loss_history;  // loss before each update, then the final loss
};

/// Full-batch gradient descent from theta = 0 on z-scored features. Stops
/// when the loss changes by less than convergence_tol or after max_epochs.
inline TrainResult train_with_history(std::span<const FeatureVector> raw, const TrainConfig& cfg = {}) {
  cfg.validate();
  detail_lr::require_nonempty(raw);
  bool has[2] = {false, false};
  for (const auto& v : raw) has[static_cast<int>(detail_lr::target(v))] = true;
  if (!has[0] || !has[1]) throw Error(Errc::SingleClassDataset, "lrmodel", "training data has a single class");

  TrainResult out;
  LrModel& m = out.model;
  m.train_config = cfg;
  m.samples = raw.size();
  m.data_digest = dataset_digest(raw);
  m.norm_stats = featurizer::fit_norm_stats(raw);
  std::vector<FeatureVector> data;
  data.reserve(raw.size());
  for (const auto& v : raw) data.push_back(featurizer::apply_norm(v, m.norm_stats));

  double prev = loss(m.theta, data, cfg.l2_penalty);
  out.loss_history.push_back(prev);
  int increases = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const Theta g = gradient(m.theta, data, cfg.l2_penalty);
    for (std::size_t j = 0; j < kThetaSize; ++j) m.theta[j] -= cfg.learning_rate * g[j];
    const double cur = loss(m.theta, data, cfg.l2_penalty);
    out.loss_history.push_back(cur);
    m.epochs_run = epoch;
    if (!std::isfinite(cur)) {
      throw Error(Errc::DivergenceDetected, "lrmodel", "loss is not finite at epoch " + std::to_string(epoch));
    }
    increases = cur > prev ? increases + 1 : 0;
    if (increases >= kDivergencePatience) {
      throw Error(Errc::DivergenceDetected, "lrmodel",
                  "loss rose for " + std::to_string(kDivergencePatience) + " consecutive epochs (epoch " +
                      std::to_string(epoch) + ", loss " + detail::format_double(cur) +
                      "); lower the learning rate");
    }
    const bool done = std::abs(prev - cur) < cfg.convergence_tol;
    prev = cur;
    if (done) {
      m.converged = true;
      break;
    }
  }
  m.final_loss = prev;
  return out;
}

inline LrModel train(std::span<const FeatureVector> raw, const TrainConfig& cfg = {}) {
  return train_with_history(raw, cfg).model;
}

struct Prediction {
  evidence::Label label;
  double probability;
};

/// Normalizes a raw vector with the model's statistics; phishing iff the
/// probability is at least the threshold.
inline Prediction predict(const LrModel& model, const FeatureVector& raw, std::optional<double> threshold = {}) {
  require_schema(model);
  const double t = threshold.value_or(model.threshold);
  if (!(t > 0.0 && t < 1.0)) throw Error(Errc::InvalidArgument, "lrmodel", "threshold must lie in (0, 1)");
  const double p = hypothesis(model, featurizer::apply_norm(raw, model.norm_stats));
  return {p >= t ? evidence::Label::Phishing : evidence::Label::Benign, p};
}

// ---------------------------------------------------------------------------
// Model file

inline nlohmann::json to_document(const LrModel& m) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    features.push_back(featurizer::short_name(i) + ":" + std::string(featurizer::kFeatureNames[i]));
  }
  const auto& c = m.train_config;
  return {{"format", kModelFormat},
          {"format_version", kModelFormatVersion},
          {"feature_schema_version", m.feature_schema_version},
          {"features", features},
          {"theta", m.theta},
          {"norm_stats", m.norm_stats},
          {"threshold", m.threshold},
          {"train_config",
           {{"objective", kObjective},
            {"optimizer", "full-batch-gradient-descent"},
            {"initial_theta", "zeros"},
            {"probability_clamp", kProbClamp},
            {"learning_rate", c.learning_rate},
            {"max_epochs", c.max_epochs},
            {"convergence_tol", c.convergence_tol},
            {"seed", c.seed},
            {"l2_penalty", c.l2_penalty}}},
          {"training",
           {{"data_digest", m.data_digest},
            {"samples", m.samples},
            {"epochs_run", m.epochs_run},
            {"final_loss", m.final_loss},
            {"converged", m.converged}}}};
}

inline std::string serialize_model(const LrModel& m) { return to_document(m).dump(2) + "\n"; }

inline LrModel parse_model(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::SchemaMismatch, "lrmodel", "model file is not JSON");
  try {
    if (j.at("format").get<std::string>() != kModelFormat || j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(Errc::SchemaMismatch, "lrmodel", "unsupported model format");
    }
    LrModel m;
    j.at("feature_schema_version").get_to(m.feature_schema_version);
    require_schema(m);
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != kThetaSize) {
      throw Error(Errc::SchemaMismatch, "lrmodel", "theta has " + std::to_string(theta.size()) + " entries");
    }
    std::copy(theta.begin(), theta.end(), m.theta.begin());
    m.norm_stats = j.at("norm_stats").get<NormStats>();
    j.at("threshold").get_to(m.threshold);
    if (!(m.threshold > 0.0 && m.threshold < 1.0)) throw Error(Errc::SchemaMismatch, "lrmodel", "threshold out of range");
    const auto& c = j.at("train_config");
    if (c.at("objective").get<std::string>() != kObjective) {
      throw Error(Errc::SchemaMismatch, "lrmodel", "unsupported objective");
    }
    c.at("learning_rate").get_to(m.train_config.learning_rate);
    c.at("max_epochs").get_to(m.train_config.max_epochs);
    c.at("convergence_tol").get_to(m.train_config.convergence_tol);
    c.at("seed").get_to(m.train_config.seed);
    c.at("l2_penalty").get_to(m.train_config.l2_penalty);
    const auto& t = j.at("training");
    t.at("data_digest").get_to(m.data_digest);
    t.at("samples").get_to(m.samples);
    t.at("epochs_run").get_to(m.epochs_run);
    t.at("final_loss").get_to(m.final_loss);
    t.at("converged").get_to(m.converged);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaMismatch, "lrmodel", std::string("model file: ") + e.what());
  }
}

inline void save_model(const LrModel& m, const std::filesystem::path& path) { write_text_file(path, serialize_model(m)); }

inline LrModel load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

}  // namespace antiphish::lrmodel
