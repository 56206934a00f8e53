// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "../generators.hpp"
#include "../oracles.hpp"
#include "antiphish/detail/digest.hpp"
#include "antiphish/detail/rng.hpp"
#include "antiphish/domkit.hpp"
#include "antiphish/evalkit.hpp"
#include "antiphish/evidence/store.hpp"
#include "antiphish/evidence/whois.hpp"
#include "antiphish/featurizer.hpp"
#include "antiphish/lrmodel.hpp"
#include "antiphish/synthcorpus.hpp"
#include "antiphish/textmetrics.hpp"

namespace fs = std::filesystem;
using namespace antiphish;
using evidence::Label;
using featurizer::FeatureVector;
using featurizer::idx;

namespace {

// Pinned limits.
constexpr double kLevenshteinSeconds = 5.0;
constexpr int kLevenshteinPairs = 1000;
constexpr std::size_t kLevenshteinMaxLen = 20;
constexpr int kGradientConfigs = 60;
constexpr double kGradientRelTol = 1e-5;
constexpr double kGradientFloor = 1e-3;
constexpr double kGradientStep = 1e-6;
constexpr double kGradientSeconds = 10.0;
constexpr double kPipelineSeconds = 60.0;
constexpr double kMinAccuracy = 95.0;
constexpr double kMaxFar = 5.0;
constexpr double kMaxFrr = 5.0;
constexpr int kMetricMatrices = 100000;
constexpr double kSameTemplateMin = 0.95;
constexpr double kUnrelatedMax = 0.5;
constexpr double kLn2Tol = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

int sh(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string cli(const std::string& args) { return quote(ANTIPHISH_CLI) + " " + args; }

int run_cli(const std::string& args, const fs::path& log) {
  return sh(cli(args) + " >>" + quote(log.string()) + " 2>&1");
}

std::string slurp(const fs::path& p) { return fs::exists(p) ? read_text_file(p) : std::string(); }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path fixture(const std::string& name) { return fs::path(ANTIPHISH_TEST_DATA_DIR) / "fixtures" / name; }

// 1
Outcome levenshtein_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  detail::Rng rng(20210601);
  int mismatches = 0;
  for (int i = 0; i < kLevenshteinPairs; ++i) {
    const auto a = gen::mixed_string(rng, kLevenshteinMaxLen);
    const auto b = gen::mixed_string(rng, kLevenshteinMaxLen);
    if (textmetrics::levenshtein(a, b) != oracle::levenshtein(a, b)) ++mismatches;
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  for (const std::string s : {"", "a", "kitten", "größe", "日本語"}) {
    const auto n = oracle::code_points(s).size();
    o.require(textmetrics::levenshtein(s, "") == n && textmetrics::levenshtein("", s) == n,
              "empty-string base case for '" + s + "'");
    o.require(textmetrics::levenshtein(s, s) == 0, "identity base case for '" + s + "'");
  }
  o.require(textmetrics::levenshtein("kitten", "sitting") == 3, "kitten/sitting != 3");
  // Head/tail recursion on code points.
  for (int i = 0; i < 200; ++i) {
    const auto x = oracle::code_points(gen::mixed_string(rng, 8));
    const auto y = oracle::code_points(gen::mixed_string(rng, 8));
    if (x.empty() || y.empty()) continue;
    const auto lev = [](const std::vector<unsigned>& a, const std::vector<unsigned>& b) {
      return textmetrics::levenshtein_seq(a, b);
    };
    const std::vector<unsigned> tx(x.begin() + 1, x.end()), ty(y.begin() + 1, y.end());
    const auto expect = x[0] == y[0] ? lev(tx, ty) : 1 + std::min({lev(tx, y), lev(x, ty), lev(tx, ty)});
    o.require(lev(x, y) == expect, "recursive step");
  }
  const double t = seconds_since(t0);
  o.require(t < kLevenshteinSeconds, "took " + fmt(t) + " s");
  if (o.pass) o.detail = std::to_string(kLevenshteinPairs) + " pairs match the DP oracle, " + fmt(t, 3) + " s";
  return o;
}

// 2
Outcome gradient_check() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  detail::Rng rng(77);
  double worst = 0.0;
  for (int c = 0; c < kGradientConfigs; ++c) {
    const auto n = static_cast<std::size_t>(rng.between(1, 40));
    const double spread = rng.uniform(0.5, 3.0);
    std::vector<FeatureVector> data;
    for (std::size_t i = 0; i < n; ++i) {
      FeatureVector v;
      for (auto& x : v.values) x = rng.uniform(-spread, spread);
      v.normalized = true;
      v.label = rng.chance(0.5) ? Label::Phishing : Label::Benign;
      data.push_back(v);
    }
    lrmodel::Theta theta{};
    for (auto& t : theta) t = rng.uniform(-1.5, 1.5);
    const double l2 = c % 3 == 0 ? rng.uniform(0.0, 0.5) : 0.0;
    const auto g = lrmodel::gradient(theta, data, l2);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto up = theta, down = theta;
      up[j] += kGradientStep;
      down[j] -= kGradientStep;
      const double numeric = (lrmodel::loss(up, data, l2) - lrmodel::loss(down, data, l2)) / (2 * kGradientStep);
      const double rel = std::abs(g[j] - numeric) / std::max({std::abs(g[j]), std::abs(numeric), kGradientFloor});
      worst = std::max(worst, rel);
    }
  }
  o.require(worst <= kGradientRelTol, "worst relative error " + std::to_string(worst));
  const double t = seconds_since(t0);
  o.require(t < kGradientSeconds, "took " + fmt(t) + " s");
  if (o.pass) {
    std::ostringstream d;
    d << kGradientConfigs << " configs, worst relative error " << std::scientific << std::setprecision(2) << worst
      << ", " << fmt(t, 3) << " s";
    o.detail = d.str();
  }
  return o;
}

// 3
Outcome synthetic_benchmark(const fs::path& work) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = work / "pipeline.log";
  std::vector<std::string> digests;
  nlohmann::json report;
  for (int run = 0; run < 2; ++run) {
    const auto dir = work / ("bench" + std::to_string(run));
    fs::create_directories(dir);
    const auto p = [&](const char* name) { return quote((dir / name).string()); };
    const std::vector<std::string> steps{
        "synth --seed 42 --benign 500 --phish 500 --store " + p("store"),
        "extract --store " + p("store") + " --out " + p("all.csv"),
        "split --in " + p("all.csv") + " --train " + p("train.csv") + " --test " + p("test.csv") +
            " --fraction 0.8 --seed 7",
        "train --in " + p("train.csv") + " --out " + p("model.json") + " --learning-rate 0.1 --max-epochs 5000",
        "evaluate --model " + p("model.json") + " --data " + p("test.csv") + " --out " + p("report.json"),
    };
    for (const auto& s : steps) {
      const int rc = run_cli(s, log);
      o.require(rc == 0, "'" + s.substr(0, s.find(' ')) + "' exited " + std::to_string(rc));
      if (rc != 0) return o;
    }
    const auto text = slurp(dir / "report.json");
    digests.push_back(detail::sha256_hex(text));
    report = nlohmann::json::parse(text);
  }
  const auto& r = report["LR"];
  const double acc = r["accuracy"], far = r["far"], frr = r["frr"];
  o.require(acc >= kMinAccuracy, "accuracy " + fmt(acc));
  o.require(far <= kMaxFar, "FAR " + fmt(far));
  o.require(frr <= kMaxFrr, "FRR " + fmt(frr));
  o.require(digests[0] == digests[1], "report digests differ across runs");
  const double t = seconds_since(t0);
  o.require(t < kPipelineSeconds, "took " + fmt(t) + " s");
  if (o.pass) {
    o.detail = "acc " + fmt(acc) + " FAR " + fmt(far) + " FRR " + fmt(frr) + ", digest " + digests[0].substr(0, 12) +
               " stable over 2 runs, " + fmt(t) + " s";
  }
  return o;
}

// 4
Outcome metric_identity() {
  Outcome o;
  detail::Rng rng(4);
  int bad = 0;
  for (int i = 0; i < kMetricMatrices; ++i) {
    const std::size_t scale = i % 2 == 0 ? 10 : 1000000;
    evalkit::ConfusionMatrix m{rng.below(scale), rng.below(scale), rng.below(scale), rng.below(scale)};
    if (m.tp + m.fn == 0) m.tp = 1;
    if (m.fp + m.tn == 0) m.tn = 1;
    const auto r = evalkit::report_from_matrix(m);
    if (r.far + r.recall != 100.0) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " matrices with far + recall != 100");
  const auto w = evalkit::report_from_matrix({90, 10, 5, 95});
  o.require(w.accuracy == 92.5, "Acc " + fmt(w.accuracy, 4));
  o.require(w.precision && fmt(*w.precision) == "94.74", "Prec");
  o.require(w.recall == 90.0, "Rec " + fmt(w.recall, 4));
  o.require(w.far == 10.0, "FAR " + fmt(w.far, 4));
  o.require(w.frr == 5.0, "FRR " + fmt(w.frr, 4));
  if (o.pass) {
    o.detail = std::to_string(kMetricMatrices) + " matrices exact; worked example 92.5/" + fmt(*w.precision) +
               "/90.0/10.0/5.0";
  }
  return o;
}

// 5
Outcome trend_detectors() {
  Outcome o;
  const auto verbatim = domkit::inspect_content("<html><body>Page Not Found 404</body></html>", 200);
  o.require(verbatim.fake_invalid, "verbatim keyword body not fake_invalid");
  o.require(domkit::inspect_content(read_text_file(fixture("fake_invalid_200.html")), 200).fake_invalid,
            "fake_invalid_200.html not fake_invalid");
  o.require(!domkit::inspect_content(read_text_file(fixture("fake_invalid_200.html")), 404).fake_invalid,
            "fake_invalid set at status 404");
  o.require(domkit::inspect_content(read_text_file(fixture("captcha_only.html")), 200).captcha_gated,
            "captcha_only.html not captcha_gated");

  const auto load = [](const char* name) {
    return nlohmann::json::parse(read_text_file(fixture(name))).get<evidence::EvidenceBundle>();
  };
  const auto redirect = featurizer::extract_features(load("hidden_redirect.json"));
  o.require(redirect.f(6) > 30.0, "f6 = " + fmt(redirect.f(6), 0));
  o.require(redirect.f(5) >= 2.0, "f5 = " + fmt(redirect.f(5), 0));
  const auto ddns = featurizer::extract_features(load("ddns_t1.json"));
  o.require(ddns.f(8) == 1.0, "ddns f8 = " + fmt(ddns.f(8), 0));
  if (o.pass) {
    o.detail = "fake_invalid, captcha_gated, redirect fixture f6=" + fmt(redirect.f(6), 0) + " f5=" + fmt(redirect.f(5), 0) +
               ", ddns f8=1";
  }
  return o;
}

// 6
Outcome dom_similarity() {
  Outcome o;
  using synthcorpus::FormSlot;
  using synthcorpus::TemplateKind;
  const auto skel = [](const std::string& html) { return domkit::extract_skeleton(html); };
  std::size_t self_checks = 0;
  for (auto kind : synthcorpus::kAllTemplates) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto s = skel(synthcorpus::sample_page(kind, seed));
      if (domkit::skeleton_similarity(s, s) != 1.0) {
        o.require(false, std::string("self similarity for ") + std::string(synthcorpus::template_name(kind)));
      }
      ++self_checks;
    }
  }
  const auto corpus = synthcorpus::generate({});
  double min_clone = 1.0;
  std::size_t clones = 0;
  for (const auto& p : corpus.pages) {
    const auto s = skel(p.bundle.snapshot.effective_html());
    o.require(domkit::skeleton_similarity(s, s) == 1.0, "self similarity for a corpus page");
    ++self_checks;
    if (p.trend == synthcorpus::Trend::DomClone && p.clone_source_html) {
      min_clone = std::min(min_clone, domkit::skeleton_similarity(skel(*p.clone_source_html), s));
      ++clones;
    }
  }
  for (auto kind : {TemplateKind::Shop, TemplateKind::News, TemplateKind::Portal}) {
    for (std::uint64_t seed = 42; seed < 52; ++seed) {
      const double sim = domkit::skeleton_similarity(skel(synthcorpus::sample_page(kind, seed, FormSlot::Credentials)),
                                                     skel(synthcorpus::sample_page(kind, seed + 1000, FormSlot::Credentials)));
      min_clone = std::min(min_clone, sim);
    }
  }
  o.require(clones > 0, "no cloned pages in the corpus");
  o.require(min_clone >= kSameTemplateMin, "same-template similarity " + fmt(min_clone, 4));
  double max_unrelated = 0.0;
  for (auto a : {TemplateKind::Shop, TemplateKind::News, TemplateKind::Portal}) {
    for (auto b : {TemplateKind::Login, TemplateKind::DocumentUpload, TemplateKind::Fake404,
                   TemplateKind::CaptchaShell, TemplateKind::RedirectStub}) {
      max_unrelated = std::max(max_unrelated, domkit::skeleton_similarity(skel(synthcorpus::sample_page(a, 42)),
                                                                          skel(synthcorpus::sample_page(b, 42))));
    }
  }
  o.require(max_unrelated <= kUnrelatedMax, "unrelated similarity " + fmt(max_unrelated, 4));
  if (o.pass) {
    o.detail = std::to_string(self_checks) + " self checks = 1.0, same template min " + fmt(min_clone, 4) +
               ", unrelated max " + fmt(max_unrelated, 4);
  }
  return o;
}

// 7
Outcome replay_determinism(const fs::path& work) {
  Outcome o;
  if (sh("unshare -n true >/dev/null 2>&1") != 0) {
    o.require(false, "unshare -n is unavailable, networking cannot be disabled at the OS level");
    return o;
  }
  const auto dir = work / "replay";
  fs::create_directories(dir);
  const auto log = work / "replay.log";
  const auto isolated = [&](const std::string& netlog, const std::string& args) {
    return sh("unshare -n env LD_PRELOAD=" + quote(ANTIPHISH_NETLOG_SHIM) + " ANTIPHISH_NETLOG=" + quote(netlog) + " " +
              cli(args) + " >>" + quote(log.string()) + " 2>&1");
  };
  const auto p = [&](const char* name) { return (dir / name).string(); };

  // Positive control: a live fetch must show up in the log.
  const int ctl_rc = isolated(p("control.netlog"), "fetch --live --timeout 2 --store " + quote(p("control-store")) +
                                                      " http://127.0.0.1:9/");
  const auto control_calls = line_count(slurp(p("control.netlog")));
  o.require(control_calls > 0, "positive control logged no calls (shim inactive)");
  o.require(ctl_rc != 0, "live fetch succeeded inside the isolated namespace");

  o.require(run_cli("synth --seed 42 --benign 200 --phish 200 --store " + quote(p("store")), log) == 0, "synth failed");
  for (int i = 0; i < 2; ++i) {
    const auto n = std::to_string(i);
    const int rc = isolated(p(("run" + n + ".netlog").c_str()),
                            "extract --store " + quote(p("store")) + " --out " + quote(p(("run" + n + ".csv").c_str())));
    o.require(rc == 0, "extract run " + n + " exited " + std::to_string(rc));
  }
  const auto a = slurp(p("run0.csv")), b = slurp(p("run1.csv"));
  o.require(!a.empty() && a == b, "feature CSVs differ");
  const auto calls = line_count(slurp(p("run0.netlog"))) + line_count(slurp(p("run1.netlog")));
  o.require(calls == 0, std::to_string(calls) + " network calls during extract");
  if (o.pass) {
    o.detail = "2 isolated extract runs byte-identical (" + std::to_string(line_count(a)) +
               " lines), 0 network calls; control logged " + std::to_string(control_calls);
  }
  return o;
}

// 8
Outcome whois_dates() {
  Outcome o;
  const std::vector<std::string> values{"2015-08-17T10:21:07Z", "17-Aug-2015", "2015.08.17", "17/08/2015"};
  int ok = 0;
  for (const auto& tag : evidence::default_creation_tags()) {
    for (const auto& value : values) {
      const std::string raw = "Domain Name: EXAMPLE-FIXTURE.COM\nRegistrar: Fixture Registrar\n" + tag + ": " + value +
                              "\nName Server: NS1.EXAMPLE-FIXTURE.COM\n";
      const auto rec = evidence::whois_record_from_raw(raw, evidence::default_creation_tags());
      const bool good = rec.creation_date && evidence::format_date(*rec.creation_date) == "2015-08-17" &&
                        rec.matched_tag == tag;
      o.require(good, tag + " / " + value);
      ok += good;
    }
  }
  o.require(ok == 28, std::to_string(ok) + " of 28 parsed");
  try {
    const auto rec = evidence::whois_record_from_raw(read_text_file(fs::path(ANTIPHISH_TEST_DATA_DIR) / "whois" / "no_date.txt"),
                                                     evidence::default_creation_tags());
    o.require(!rec.creation_date, "no_date.txt produced a creation date");
  } catch (const std::exception& e) {
    o.require(false, std::string("no_date.txt threw: ") + e.what());
  }
  if (o.pass) o.detail = "28 tag x format cases, no-date fixture absent";
  return o;
}

// 9
std::vector<FeatureVector> separable_toy() {
  std::vector<FeatureVector> out;
  for (int i = 0; i < 10; ++i) {
    FeatureVector p;
    p.key = "p" + std::to_string(i);
    p[idx(6)] = 34.0 + 2.5 * i;
    p[idx(5)] = 2.0 + i % 2;
    p[idx(12)] = 45.0 + (i % 3) * 6.0;
    p.label = Label::Phishing;
    out.push_back(p);
    FeatureVector b;
    b.key = "b" + std::to_string(i);
    b[idx(6)] = (i % 4) * 1.5;
    b[idx(5)] = i % 2;
    b[idx(12)] = 16.0 + (i % 5) * 3.0;
    b.label = Label::Benign;
    out.push_back(b);
  }
  return out;
}

Outcome training_determinism() {
  Outcome o;
  const auto toy = separable_toy();
  const auto a = lrmodel::train(toy);
  const auto b = lrmodel::train(toy);
  o.require(std::memcmp(a.theta.data(), b.theta.data(), sizeof(lrmodel::Theta)) == 0, "theta differs bitwise");
  o.require(lrmodel::serialize_model(a) == lrmodel::serialize_model(b), "serialized models differ");
  std::size_t correct = 0;
  for (const auto& v : toy) correct += lrmodel::predict(a, v).label == *v.label;
  o.require(correct == toy.size(), "training accuracy " + std::to_string(correct) + "/20");

  std::vector<FeatureVector> normed;
  for (const auto& v : toy) normed.push_back(featurizer::apply_norm(v, a.norm_stats));
  const double l0 = lrmodel::loss(lrmodel::Theta{}, normed);
  o.require(std::abs(l0 - std::log(2.0)) <= kLn2Tol, "loss at zero theta " + std::to_string(l0));
  if (o.pass) {
    std::ostringstream d;
    d << "bitwise theta match, 20/20 training accuracy, |loss(0) - ln 2| = " << std::scientific << std::setprecision(1)
      << std::abs(l0 - std::log(2.0));
    o.detail = d.str();
  }
  return o;
}

}  // namespace

int main() {
  const auto work = fs::temp_directory_path() / ("antiphish_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"levenshtein-oracle", levenshtein_oracle},
      {"gradient-check", gradient_check},
      {"synthetic-benchmark", [&] { return synthetic_benchmark(work); }},
      {"metric-identity", metric_identity},
      {"trend-detectors", trend_detectors},
      {"dom-similarity", dom_similarity},
      {"replay-determinism", [&] { return replay_determinism(work); }},
      {"whois-dates", whois_dates},
      {"training-determinism", training_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  if (failed == 0) fs::remove_all(work);
  else std::cout << "work directory kept at " << work << "\n";
  return failed == 0 ? 0 : 1;
}
