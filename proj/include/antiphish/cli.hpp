#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "antiphish/detail/digest.hpp"
#include "antiphish/domkit.hpp"
#include "antiphish/error.hpp"
#include "antiphish/evalkit.hpp"
#include "antiphish/evidence/collector.hpp"
#include "antiphish/evidence/store.hpp"
#include "antiphish/featurizer.hpp"
#include "antiphish/lists.hpp"
#include "antiphish/lrmodel.hpp"
#include "antiphish/synthcorpus.hpp"

namespace antiphish::cli {

inline constexpr std::string_view kToolVersion = "antiphish 0.1.0";

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kService = 3 };

inline int exit_code_for(Errc code) {
  if (code == Errc::InvalidArgument || code == Errc::InvalidMix) return kUsage;
  if (is_service_error(code)) return kService;
  return kData;
}

// ---------------------------------------------------------------------------
// Run manifest

struct RunManifest {
  std::string command;
  std::string mode = "replay";
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  evidence::Timestamp started_at{};
  evidence::Timestamp finished_at{};

  [[nodiscard]] std::string config_digest() const { return detail::sha256_hex(config.dump()); }

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"command", command},
            {"tool_version", kToolVersion},
            {"mode", mode},
            {"config", config},
            {"config_digest", config_digest()},
            {"inputs", inputs},
            {"outputs", outputs},
            {"started_at", evidence::format_timestamp(started_at)},
            {"finished_at", evidence::format_timestamp(finished_at)}};
  }
};

inline evidence::Timestamp now_seconds() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

/// "<output>.manifest.json" beside a file or directory output.
inline std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto s = output.string();
  while (s.size() > 1 && s.back() == '/') s.pop_back();
  return s + ".manifest.json";
}

inline RunManifest begin_run(std::string command) {
  RunManifest m;
  m.command = std::move(command);
  m.started_at = now_seconds();
  return m;
}

inline void write_manifest(RunManifest m, const std::filesystem::path& output) {
  m.finished_at = now_seconds();
  write_text_file(manifest_path(output), m.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// URL list

/// One URL per line with an optional "<TAB>label" suffix; '#' starts a
/// comment line.
inline std::vector<evidence::UrlJob> parse_url_list(std::string_view text) {
  std::vector<evidence::UrlJob> jobs;
  std::size_t line_no = 0;
  for (const auto& raw : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    evidence::UrlJob job;
    const auto tab = line.find('\t');
    job.url = std::string(detail::trim(line.substr(0, tab)));
    if (tab != std::string_view::npos) {
      const auto label_text = detail::trim(line.substr(tab + 1));
      if (!label_text.empty()) {
        job.label = evidence::parse_label(label_text);
        if (!job.label) {
          throw Error(Errc::MalformedCsv, "cli",
                      "url list line " + std::to_string(line_no) + ": unknown label '" + std::string(label_text) + "'");
        }
      }
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

// ---------------------------------------------------------------------------
// Commands

struct FeatureFlags {
  std::string benign_hosts_file;
  double age_imputation_days = 0.0;
  bool no_reputation = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--benign-hosts", benign_hosts_file, "Benign hosting list, one domain per line")
        ->check(CLI::ExistingFile);
    cmd->add_option("--age-imputation", age_imputation_days, "Domain age in days used when WHOIS has no date")
        ->capture_default_str();
    cmd->add_flag("--no-reputation", no_reputation, "Force the blocklist feature to 0");
  }

  [[nodiscard]] featurizer::FeatureConfig config() const {
    featurizer::FeatureConfig c;
    if (!benign_hosts_file.empty()) c.benign_hosts = urlkit::BenignHostList(load_line_list(benign_hosts_file));
    c.age_imputation_days = age_imputation_days;
    c.use_reputation = !no_reputation;
    return c;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"benign_hosts", benign_hosts_file.empty() ? nlohmann::json(nullptr) : nlohmann::json(benign_hosts_file)},
            {"age_imputation_days", age_imputation_days},
            {"use_reputation", !no_reputation}};
  }
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct FetchCmd {
  bool live = false;
  bool replay = false;
  std::string store;
  std::string list_file;
  std::vector<std::string> urls;
  unsigned workers = 4;
  double timeout_s = 10.0;

  int run(Io io) const {
    auto m = begin_run("fetch");
    m.mode = live ? "live" : "replay";
    std::vector<evidence::UrlJob> jobs;
    if (!list_file.empty()) {
      jobs = parse_url_list(read_text_file(list_file));
      m.inputs.push_back(list_file);
    }
    for (const auto& u : urls) jobs.push_back({u, std::nullopt});
    if (jobs.empty()) throw Error(Errc::InvalidArgument, "cli", "no URLs given (use --list or positional URLs)");
    m.config = {{"workers", workers}, {"timeout_s", timeout_s}, {"urls", jobs.size()}};
    m.outputs.push_back(store);

    const evidence::NetworkPolicy policy(live ? evidence::Mode::Live : evidence::Mode::Replay);
    auto config = evidence::CollectorConfig::from_env();
    config.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
    evidence::Collector collector(policy, config);
    evidence::ReplayStore replay_store(store);
    const auto outcomes = evidence::fetch_all(policy, collector, replay_store, jobs, workers);

    int code = kOk;
    std::size_t ok = 0;
    for (const auto& o : outcomes) {
      if (o.bundle) {
        ++ok;
        io.out << "ok " << evidence::bundle_key(o.url) << " " << o.url << "\n";
        for (const auto& note : o.bundle->notes) io.err << "note " << o.url << ": " << note << "\n";
        continue;
      }
      const std::string key = evidence::bundle_key(o.url);
      const std::string what = o.error->what();
      io.err << "antiphish fetch: " << what;
      if (what.find(key) == std::string::npos) io.err << " [url " << o.url << ", key " << key << "]";
      io.err << "\n";
      code = std::max(code, exit_code_for(o.error->code()));
    }
    io.err << ok << "/" << outcomes.size() << " bundles " << (live ? "recorded" : "present") << " in " << store << "\n";
    write_manifest(m, store);
    return code;
  }
};

struct ExtractCmd {
  std::string store;
  std::string out;
  FeatureFlags features;

  int run(Io io) const {
    auto m = begin_run("extract");
    m.config = {{"features", features.to_json()}};
    m.inputs = {store};
    m.outputs = {out};
    const evidence::ReplayStore s(store);
    if (!std::filesystem::is_directory(store)) throw Error(Errc::Io, "cli", "no store at " + store);
    const auto cfg = features.config();
    std::vector<featurizer::FeatureVector> vectors;
    std::size_t with_notes = 0;
    for (const auto& key : s.keys()) {
      try {
        auto v = featurizer::extract_features(s.load(key), cfg);
        with_notes += !v.notes.empty();
        vectors.push_back(std::move(v));
      } catch (const Error& e) {
        throw Error(e.code(), e.module(), e.detail() + " [key " + key + "]");
      }
    }
    if (vectors.empty()) throw Error(Errc::EmptyDataset, "cli", "store " + store + " holds no bundles");
    write_text_file(out, featurizer::feature_csv(vectors));
    io.err << "extracted " << vectors.size() << " vectors to " << out << " (" << with_notes
           << " with imputed evidence)\n";
    write_manifest(m, out);
    return kOk;
  }
};

struct SplitCmd {
  std::string in;
  std::string train_out;
  std::string test_out;
  double fraction = 0.8;
  std::uint64_t seed = 0;

  int run(Io io) const {
    auto m = begin_run("split");
    m.config = {{"fraction", fraction}, {"seed", seed}};
    m.inputs = {in};
    m.outputs = {train_out, test_out};
    const auto data = featurizer::read_feature_csv_file(in);
    const auto s = evalkit::split(data, fraction, seed);
    write_text_file(train_out, featurizer::feature_csv(s.train));
    write_text_file(test_out, featurizer::feature_csv(s.test));
    io.err << "split " << data.size() << " rows: " << s.train.size() << " train, " << s.test.size() << " test\n";
    write_manifest(m, train_out);
    return kOk;
  }
};

struct TrainCmd {
  std::string in;
  std::string out;
  lrmodel::TrainConfig train;
  double threshold = 0.5;

  int run(Io io) const {
    auto m = begin_run("train");
    m.config = {{"learning_rate", train.learning_rate}, {"max_epochs", train.max_epochs},
                {"convergence_tol", train.convergence_tol}, {"l2_penalty", train.l2_penalty},
                {"seed", train.seed}, {"threshold", threshold}};
    m.inputs = {in};
    m.outputs = {out};
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error(Errc::InvalidArgument, "cli", "threshold must lie in (0, 1)");
    const auto data = featurizer::read_feature_csv_file(in, {.require_labels = true});
    auto model = lrmodel::train(data, train);
    model.threshold = threshold;
    for (const auto& w : model.norm_stats.warnings) io.err << "warning: " << w << "\n";
    lrmodel::save_model(model, out);
    io.err << "trained on " << model.samples << " samples: " << model.epochs_run << " epochs, final loss "
           << fixed(model.final_loss, 6) << (model.converged ? ", converged" : ", epoch limit reached") << "\n";
    write_manifest(m, out);
    return kOk;
  }
};

struct PredictCmd {
  std::string model_file;
  std::string store;
  std::string url;
  std::string key;
  std::optional<double> threshold;
  FeatureFlags features;

  int run(Io io) const {
    const auto model = lrmodel::load_model(model_file);
    const std::string id = key.empty() ? url : key;
    evidence::EvidenceBundle bundle;
    try {
      bundle = evidence::ReplayStore(store).load(id);
    } catch (const Error& e) {
      throw Error(e.code(), e.module(), e.detail() + " [store " + store + "]");
    }
    const auto v = featurizer::extract_features(bundle, features.config());
    const auto p = lrmodel::predict(model, v, threshold);
    io.out << evidence::label_name(p.label) << " p=" << fixed(p.probability, 2) << "\n";
    return kOk;
  }
};

struct EvaluateCmd {
  std::string data_file;
  std::string model_file;
  std::string name = "LR";
  std::vector<std::string> predictions;  // NAME=FILE
  std::optional<double> threshold;
  std::string out;

  int run(Io io) const {
    auto m = begin_run("evaluate");
    m.inputs = {data_file};
    if (model_file.empty() && predictions.empty()) {
      throw Error(Errc::InvalidArgument, "cli", "give --model, --predictions or both");
    }
    const auto data = evalkit::load_labeled_dataset(data_file);
    std::vector<std::pair<std::string, evalkit::EvalReport>> rows;
    if (!model_file.empty()) {
      auto model = lrmodel::load_model(model_file);
      if (threshold) {
        if (!(*threshold > 0.0 && *threshold < 1.0)) {
          throw Error(Errc::InvalidArgument, "cli", "threshold must lie in (0, 1)");
        }
        model.threshold = *threshold;
      }
      rows.emplace_back(name, evalkit::evaluate(model, data));
      m.inputs.push_back(model_file);
    }
    for (const auto& entry : predictions) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
        throw Error(Errc::InvalidArgument, "cli", "--predictions expects NAME=FILE, got '" + entry + "'");
      }
      const auto file = entry.substr(eq + 1);
      rows.emplace_back(entry.substr(0, eq), evalkit::evaluate_predictions(data, evalkit::load_predictions(file)));
      m.inputs.push_back(file);
    }
    io.out << evalkit::format_table(rows);
    m.config = {{"name", name}, {"threshold", threshold ? nlohmann::json(*threshold) : nlohmann::json(nullptr)}};
    if (!out.empty()) {
      nlohmann::json doc = nlohmann::json::object();
      for (const auto& [method, report] : rows) doc[method] = evalkit::report_json(report);
      write_text_file(out, doc.dump(2) + "\n");
      m.outputs.push_back(out);
      write_manifest(m, out);
    }
    return kOk;
  }
};

struct AnalyzeCmd {
  std::string in;
  std::string out;

  int run(Io io) const {
    auto m = begin_run("analyze");
    m.inputs = {in};
    const auto data = featurizer::read_feature_csv_file(in, {.require_labels = true});
    const auto report = featurizer::correlation_report(data);
    io.out << featurizer::format_report_text(report);
    if (!out.empty()) {
      write_text_file(out, featurizer::report_json(report).dump(2) + "\n");
      m.outputs.push_back(out);
      write_manifest(m, out);
    }
    return kOk;
  }
};

struct DomsimCmd {
  std::string a;
  std::string b;
  double threshold = domkit::kDefaultSimilarityThreshold;

  int run(Io io) const {
    const auto sa = domkit::extract_skeleton(read_text_file(a));
    const auto sb = domkit::extract_skeleton(read_text_file(b));
    const bool similar = domkit::structurally_similar(sa, sb, threshold);
    io.out << fixed(domkit::skeleton_similarity(sa, sb), 4) << (similar ? " similar" : " distinct") << "\n";
    return kOk;
  }
};

struct SynthCmd {
  std::string store;
  synthcorpus::CorpusConfig corpus;
  std::vector<double> mix;

  int run(Io io) {
    auto m = begin_run("synth");
    m.outputs = {store};
    if (!mix.empty()) {
      if (mix.size() != synthcorpus::kTrendCount) {
        throw Error(Errc::InvalidMix, "cli", "--mix needs 5 proportions (T1..T5)");
      }
      std::copy(mix.begin(), mix.end(), corpus.trend_mix.begin());
    }
    corpus.validate();
    m.config = synthcorpus::config_json(corpus);
    const evidence::ReplayStore existing(store);
    if (const auto n = existing.keys().size(); n > 0) {
      throw Error(Errc::InvalidArgument, "cli", store + " already holds " + std::to_string(n) + " bundles");
    }
    const auto c = synthcorpus::generate(corpus);
    synthcorpus::write_store(c, store);
    io.err << "wrote " << c.pages.size() << " bundles (" << corpus.n_benign << " benign, " << corpus.n_phish
           << " phishing) to " << store << "\n";
    write_manifest(m, store);
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// Entry point

/// Parses argv and runs one subcommand. Exit codes: 0 ok, 1 usage,
/// 2 data, 3 external service.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Phishing page detection from URL, page content and third-party evidence.", "antiphish"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough(false);

  FetchCmd fetch;
  auto* fetch_cmd = app.add_subcommand("fetch", "Collect evidence bundles into a replay store");
  auto* live_flag = fetch_cmd->add_flag("--live", fetch.live, "Query the network and record what it returns");
  auto* replay_flag = fetch_cmd->add_flag("--replay", fetch.replay, "Only load recorded bundles (default)");
  live_flag->excludes(replay_flag);
  fetch_cmd->add_option("--store", fetch.store, "Replay store directory")->required();
  fetch_cmd->add_option("--list", fetch.list_file, "URL list: one URL per line, optional <TAB>label, '#' comments")
      ->check(CLI::ExistingFile);
  fetch_cmd->add_option("--workers", fetch.workers, "Concurrent workers")->capture_default_str()->check(CLI::Range(1, 64));
  fetch_cmd->add_option("--timeout", fetch.timeout_s, "Per-request timeout in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fetch_cmd->add_option("urls", fetch.urls, "URLs to fetch");

  ExtractCmd extract;
  auto* extract_cmd = app.add_subcommand("extract", "Turn a replay store into a feature CSV");
  extract_cmd->add_option("--store", extract.store, "Replay store directory")->required();
  extract_cmd->add_option("--out", extract.out, "Feature CSV to write")->required();
  extract.features.add_to(extract_cmd);

  SplitCmd split;
  auto* split_cmd = app.add_subcommand("split", "Stratified train/test split of a feature CSV");
  split_cmd->add_option("--in", split.in, "Feature CSV")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--train", split.train_out, "Training CSV to write")->required();
  split_cmd->add_option("--test", split.test_out, "Test CSV to write")->required();
  split_cmd->add_option("--fraction", split.fraction, "Share of each class used for training")->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Shuffle seed")->required();

  TrainCmd train;
  auto* train_cmd = app.add_subcommand("train", "Fit the logistic regression model");
  train_cmd->add_option("--in", train.in, "Labeled feature CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  train_cmd->add_option("--learning-rate", train.train.learning_rate, "Gradient descent step size")
      ->capture_default_str();
  train_cmd->add_option("--max-epochs", train.train.max_epochs, "Epoch limit")->capture_default_str();
  train_cmd->add_option("--tol", train.train.convergence_tol, "Stop when the loss improves by less than this")
      ->capture_default_str();
  train_cmd->add_option("--l2", train.train.l2_penalty, "L2 penalty on the weights")->capture_default_str();
  train_cmd->add_option("--seed", train.train.seed, "Seed recorded with the model")->capture_default_str();
  train_cmd->add_option("--threshold", train.threshold, "Decision threshold stored in the model")
      ->capture_default_str();

  PredictCmd predict;
  auto* predict_cmd = app.add_subcommand("predict", "Classify one recorded page");
  predict_cmd->add_option("--model", predict.model_file, "Model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--store", predict.store, "Replay store directory")->required();
  auto* url_opt = predict_cmd->add_option("--url", predict.url, "URL of a recorded page");
  auto* key_opt = predict_cmd->add_option("--key", predict.key, "Store key of a recorded page");
  url_opt->excludes(key_opt);
  predict_cmd->add_option("--threshold", predict.threshold, "Override the model threshold");
  predict.features.add_to(predict_cmd);

  EvaluateCmd evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a model or external predictions on labeled data");
  evaluate_cmd->add_option("--data", evaluate.data_file, "Labeled feature CSV")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--model", evaluate.model_file, "Model file")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--name", evaluate.name, "Row name for the model")->capture_default_str();
  evaluate_cmd->add_option("--predictions", evaluate.predictions, "NAME=FILE of key,label predictions (repeatable)");
  evaluate_cmd->add_option("--threshold", evaluate.threshold, "Override the model threshold");
  evaluate_cmd->add_option("--out", evaluate.out, "JSON report to write");

  AnalyzeCmd analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Feature correlation report, or DOM similarity with 'domsim'");
  analyze_cmd->add_option("--in", analyze.in, "Labeled feature CSV")->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", analyze.out, "JSON report to write");
  DomsimCmd domsim;
  auto* domsim_cmd = analyze_cmd->add_subcommand("domsim", "Skeleton similarity of two HTML files");
  domsim_cmd->add_option("a", domsim.a, "First HTML file")->required()->check(CLI::ExistingFile);
  domsim_cmd->add_option("b", domsim.b, "Second HTML file")->required()->check(CLI::ExistingFile);
  domsim_cmd->add_option("--threshold", domsim.threshold, "Similarity reported as 'similar' at or above this value")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  SynthCmd synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic replay store");
  synth_cmd->add_option("--store", synth.store, "Replay store directory to create")->required();
  synth_cmd->add_option("--seed", synth.corpus.seed, "Generator seed")->required();
  synth_cmd->add_option("--benign", synth.corpus.n_benign, "Benign pages")->capture_default_str();
  synth_cmd->add_option("--phish", synth.corpus.n_phish, "Phishing pages")->capture_default_str();
  synth_cmd->add_option("--mix", synth.mix, "Trend proportions T1,T2,T3,T4,T5 (default uniform)")->delimiter(',');
  synth_cmd->add_option("--benign-host-fraction", synth.corpus.benign_host_fraction,
                        "Share of benign sites hosted on free hosting services")
      ->capture_default_str();
  synth_cmd->add_option("--benign-login-fraction", synth.corpus.benign_login_fraction,
                        "Share of benign sites with a login form")
      ->capture_default_str();

  std::string active = "antiphish";
  try {
    app.parse(argc, argv);
    for (const auto* sub : app.get_subcommands()) active = sub->get_name();
    if (domsim_cmd->parsed()) active = "analyze domsim";
    const Io io{out, err};
    if (fetch_cmd->parsed()) return fetch.run(io);
    if (extract_cmd->parsed()) return extract.run(io);
    if (split_cmd->parsed()) return split.run(io);
    if (train_cmd->parsed()) return train.run(io);
    if (predict_cmd->parsed()) {
      if (predict.url.empty() && predict.key.empty()) throw CLI::RequiredError("--url or --key");
      return predict.run(io);
    }
    if (evaluate_cmd->parsed()) return evaluate.run(io);
    if (domsim_cmd->parsed()) return domsim.run(io);
    if (analyze_cmd->parsed()) {
      if (analyze.in.empty()) throw CLI::RequiredError("--in (or the domsim subcommand)");
      return analyze.run(io);
    }
    if (synth_cmd->parsed()) return synth.run(io);
    return kUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const Error& e) {
    err << "antiphish " << active << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "antiphish " << active << ": " << e.what() << "\n";
    return kData;
  }
}

}  // namespace antiphish::cli
