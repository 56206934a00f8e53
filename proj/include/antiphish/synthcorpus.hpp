#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "antiphish/detail/rng.hpp"
#include "antiphish/error.hpp"
#include "antiphish/evidence/store.hpp"
#include "antiphish/evidence/types.hpp"
#include "antiphish/evidence/whois.hpp"
#include "antiphish/lists.hpp"
#include "antiphish/textmetrics.hpp"
#include "antiphish/urlkit.hpp"

namespace antiphish::synthcorpus {

using evidence::EvidenceBundle;
using evidence::Label;

inline constexpr std::string_view kGeneratorVersion = "antiphish-synthcorpus/1";
inline constexpr std::size_t kTrendCount = 5;

/// Phishing evasion trends.
enum class Trend {
  BenignHost = 0,   // T1: page deployed under a free hosting or dynamic-DNS service
  DomClone = 1,     // T2: structure copied from a legitimate page
  HiddenFinal = 2,  // T3: final page only reachable after rendering and redirects
  IdentityDocs = 3, // T4: asks for passport or ID uploads
  FakeInvalid = 4,  // T5: pretends to be an error page or sits behind a captcha
};

inline std::string trend_name(Trend t) { return "T" + std::to_string(static_cast<int>(t) + 1); }

inline std::optional<Trend> parse_trend(std::string_view s) {
  for (std::size_t i = 0; i < kTrendCount; ++i) {
    if (trend_name(static_cast<Trend>(i)) == s) return static_cast<Trend>(i);
  }
  return std::nullopt;
}

struct CorpusConfig {
  std::size_t n_benign = 500;
  std::size_t n_phish = 500;
  std::uint64_t seed = 42;
  std::array<double, kTrendCount> trend_mix{0.2, 0.2, 0.2, 0.2, 0.2};
  /// Share of benign sites that are legitimate tenants of the hosting
  /// services T1 abuses.
  double benign_host_fraction = 0.05;
  /// Share of benign sites that show their own login form.
  double benign_login_fraction = 0.25;

  void validate() const {
    double sum = 0.0;
    for (double p : trend_mix) {
      if (!std::isfinite(p) || p < 0.0) throw Error(Errc::InvalidMix, "synthcorpus", "negative or non-finite proportion");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(Errc::InvalidMix, "synthcorpus", "trend mix sums to " + detail::format_double(sum));
    }
    if (n_benign < 1 || n_phish < 1) throw Error(Errc::InvalidArgument, "synthcorpus", "need at least one page per class");
    for (double f : {benign_host_fraction, benign_login_fraction}) {
      if (!(f >= 0.0 && f <= 1.0)) throw Error(Errc::InvalidArgument, "synthcorpus", "fractions must lie in [0, 1]");
    }
  }
};

inline nlohmann::json config_json(const CorpusConfig& c) {
  nlohmann::json mix = nlohmann::json::object();
  for (std::size_t i = 0; i < kTrendCount; ++i) mix[trend_name(static_cast<Trend>(i))] = c.trend_mix[i];
  return {{"n_benign", c.n_benign},
          {"n_phish", c.n_phish},
          {"seed", c.seed},
          {"trend_mix", mix},
          {"benign_host_fraction", c.benign_host_fraction},
          {"benign_login_fraction", c.benign_login_fraction}};
}

/// Pages per trend by largest remainder; ties go to the lower trend.
inline std::array<std::size_t, kTrendCount> trend_counts(const CorpusConfig& c) {
  std::array<std::size_t, kTrendCount> out{};
  std::array<double, kTrendCount> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < kTrendCount; ++i) {
    const double exact = c.trend_mix[i] * static_cast<double>(c.n_phish);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  while (assigned < c.n_phish) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kTrendCount; ++i) {
      if (rem[i] > rem[best]) best = i;
    }
    ++out[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Page templates

enum class TemplateKind { Shop, News, Portal, Login, DocumentUpload, Fake404, CaptchaShell, RedirectStub };

inline constexpr std::array<TemplateKind, 8> kAllTemplates{
    TemplateKind::Shop,           TemplateKind::News,    TemplateKind::Portal,       TemplateKind::Login,
    TemplateKind::DocumentUpload, TemplateKind::Fake404, TemplateKind::CaptchaShell, TemplateKind::RedirectStub};

inline std::string_view template_name(TemplateKind k) {
  switch (k) {
    case TemplateKind::Shop: return "shop";
    case TemplateKind::News: return "news";
    case TemplateKind::Portal: return "portal";
    case TemplateKind::Login: return "login";
    case TemplateKind::DocumentUpload: return "document-upload";
    case TemplateKind::Fake404: return "fake-404";
    case TemplateKind::CaptchaShell: return "captcha-shell";
    case TemplateKind::RedirectStub: return "redirect-stub";
  }
  return "?";
}

/// What the page's form asks for.
enum class FormSlot { Search, BenignLogin, Credentials, CredentialsCard, Document };

struct PageSpec {
  TemplateKind kind = TemplateKind::Shop;
  FormSlot form = FormSlot::Search;
  std::string brand = "Example";
  std::string title = "Example";
  /// Redirect target or form action.
  std::string target = "/submit";
  /// fake-404 message; must hold a validity keyword.
  std::string message = "Page Not Found";
};

namespace detail_synth {

inline const std::vector<std::string>& adjectives() {
  static const std::vector<std::string> v{"blue",   "north",  "bright", "silver",  "green",    "urban",   "quiet",
                                          "rapid",  "golden", "cedar",  "maple",   "harbor",   "summit",  "coastal",
                                          "velvet", "amber",  "copper", "meadow",  "evergreen", "lumen",  "oak"};
  return v;
}

inline const std::vector<std::string>& nouns() {
  static const std::vector<std::string> v{"cart",  "wind",  "leaf",   "stone", "field",  "river",  "market",
                                          "books", "forge", "garden", "pixel", "kitchen", "journal", "trail",
                                          "studio", "supply", "works", "lane",  "post",   "bakery", "tools"};
  return v;
}

inline const std::vector<std::string>& phish_words() {
  static const std::vector<std::string> v{"secure", "account", "verify",  "login",  "update", "support",
                                          "service", "billing", "auth",   "confirm", "wallet", "recovery",
                                          "signin", "alert",   "portal",  "access", "center", "notice"};
  return v;
}

inline const std::vector<std::string>& benign_tlds() {
  static const std::vector<std::string> v{"com", "com", "com", "org", "net", "co.uk", "io", "de"};
  return v;
}

inline const std::vector<std::string>& phish_tlds() {
  static const std::vector<std::string> v{"com", "xyz", "top", "info", "online", "site", "net", "live"};
  return v;
}

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

inline std::string hex_token(detail::Rng& rng, std::size_t len) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += kHex[rng.below(16)];
  return s;
}

// Takes exactly one draw from the page RNG whatever the slot, so pages that
// differ only in their form share all other text.
inline std::string form_html(FormSlot slot, const std::string& action, detail::Rng& page_rng) {
  detail::Rng rng(page_rng.next());
  const auto id = hex_token(rng, 4);
  switch (slot) {
    case FormSlot::Search:
      return "<form action=\"/search\" method=\"get\" class=\"search-" + id + "\"><input type=\"search\" name=\"q\" "
             "placeholder=\"" + rng.pick(std::vector<std::string>{"Search", "Find", "Search the site"}) +
             "\"><button type=\"submit\">Go</button></form>";
    case FormSlot::BenignLogin:
      return "<form action=\"/session\" method=\"post\" class=\"login-" + id + "\"><label>Username</label>"
             "<input type=\"text\" name=\"username\"><label>Password</label><input type=\"password\" name=\"password\">"
             "<button type=\"submit\">Log in</button></form>";
    case FormSlot::Credentials:
      return "<form action=\"" + action + "\" method=\"post\" class=\"login-" + id + "\"><label>" +
             rng.pick(std::vector<std::string>{"Email", "Email address", "Email or phone"}) +
             "</label><input type=\"email\" name=\"email\"><label>Password</label>"
             "<input type=\"password\" name=\"pass\"><button type=\"submit\">" +
             rng.pick(std::vector<std::string>{"Sign in", "Continue", "Log in", "Next"}) + "</button></form>";
    case FormSlot::CredentialsCard:
      return "<form action=\"" + action + "\" method=\"post\" class=\"verify-" + id + "\"><label>Email</label>"
             "<input type=\"email\" name=\"email\"><label>Password</label><input type=\"password\" name=\"pass\">"
             "<label>Card number</label><input type=\"text\" name=\"cc-number\"><label>CVV</label>"
             "<input type=\"text\" name=\"cvv\"><button type=\"submit\">Confirm</button></form>";
    case FormSlot::Document:
      return "<form action=\"" + action + "\" method=\"post\" enctype=\"multipart/form-data\"><label>Full name</label>"
             "<input type=\"text\" name=\"fullname\"><label>" +
             rng.pick(std::vector<std::string>{"Passport or ID card", "Photo of your passport", "Passport scan"}) +
             "</label><input type=\"file\" name=\"passport\"><label>Email</label><input type=\"email\" name=\"email\">"
             "<button type=\"submit\">Submit</button></form>";
  }
  return {};
}

inline std::string head_html(const PageSpec& p, detail::Rng& rng) {
  return "<head><meta charset=\"utf-8\"><title>" + p.title + "</title><link rel=\"stylesheet\" href=\"/static/" +
         hex_token(rng, 6) + ".css\"></head>";
}

inline std::string nav_html(detail::Rng& rng) {
  static const std::vector<std::string> items{"Home", "About", "Shop", "Blog", "Help", "Contact", "Deals", "Services"};
  std::string out = "<nav><ul>";
  for (int i = 0; i < 4; ++i) {
    const auto& item = rng.pick(items);
    out += "<li><a href=\"/" + detail::to_lower(item) + "\">" + item + "</a></li>";
  }
  return out + "</ul></nav>";
}

inline std::string footer_html(const PageSpec& p) {
  return "<footer><p>&copy; 2021 " + p.brand +
         "</p><ul><li><a href=\"/about\">About us</a></li><li><a href=\"/contact\">Contact</a></li>"
         "<li><a href=\"/privacy\">Privacy</a></li></ul></footer>";
}

inline std::string shop_body(const PageSpec& p, detail::Rng& rng) {
  static const std::vector<std::string> products{"Canvas Tote", "Desk Lamp", "Travel Mug", "Wool Scarf",
                                                 "Notebook Set", "Plant Pot", "Water Bottle", "Tea Sampler"};
  std::string out = "<body><header class=\"top\"><a href=\"/\" class=\"logo\">" + p.brand + "</a>" + nav_html(rng) +
                    form_html(p.form, p.target, rng) + "</header><main><h1>" +
                    rng.pick(std::vector<std::string>{"New arrivals", "Spring collection", "Best sellers"}) +
                    " at " + p.brand + "</h1><section class=\"grid\">";
  for (int i = 0; i < 4; ++i) {
    const auto& name = rng.pick(products);
    out += "<article class=\"item\"><img src=\"/img/" + hex_token(rng, 8) + ".jpg\" alt=\"" + name + "\"><h2>" + name +
           "</h2><p class=\"price\">$" + std::to_string(rng.between(5, 250)) + ".99</p><a href=\"/p/" +
           hex_token(rng, 6) + "\" class=\"btn\">View</a></article>";
  }
  return out + "</section></main>" + footer_html(p) + "</body>";
}

inline std::string news_body(const PageSpec& p, detail::Rng& rng) {
  static const std::vector<std::string> topics{"City council approves new park", "Local team wins regional final",
                                               "Farmers market returns this weekend", "Library extends opening hours",
                                               "Bridge repairs finish early", "School garden project grows"};
  std::string out = "<body><header class=\"masthead\"><a href=\"/\" class=\"logo\">" + p.brand + "</a>" +
                    nav_html(rng) + form_html(p.form, p.target, rng) + "</header><main>";
  for (int i = 0; i < 3; ++i) {
    out += "<article><h2><a href=\"/story/" + hex_token(rng, 6) + "\">" + rng.pick(topics) + "</a></h2><time>June " +
           std::to_string(rng.between(1, 28)) + ", 2021</time><p>" + p.brand + " reporters follow the story.</p></article>";
  }
  out += "<aside><h3>Most read</h3><ul>";
  for (int i = 0; i < 3; ++i) out += "<li><a href=\"/story/" + hex_token(rng, 6) + "\">" + rng.pick(topics) + "</a></li>";
  return out + "</ul></aside></main>" + footer_html(p) + "</body>";
}

inline std::string portal_body(const PageSpec& p, detail::Rng& rng) {
  static const std::vector<std::string> perks{"Fast support", "Secure storage", "Team sharing", "Daily backups",
                                              "Mobile access", "Simple pricing"};
  std::string out = "<body><header class=\"bar\"><a href=\"/\" class=\"logo\">" + p.brand + "</a>" + nav_html(rng) +
                    "</header><main><div class=\"hero\"><h1>Welcome to " + p.brand + "</h1><p>" +
                    rng.pick(std::vector<std::string>{"Manage your projects in one place.",
                                                      "Everything your team needs.", "Work from anywhere."}) +
                    "</p>" + form_html(p.form, p.target, rng) + "</div><section class=\"perks\">";
  for (int i = 0; i < 3; ++i) out += "<div class=\"perk\"><h3>" + rng.pick(perks) + "</h3><p>Included in every plan.</p></div>";
  return out + "</section></main>" + footer_html(p) + "</body>";
}

inline std::string login_body(const PageSpec& p, detail::Rng& rng) {
  return "<body><div class=\"wrap\"><div class=\"panel\"><img src=\"/img/" + hex_token(rng, 8) +
         ".png\" alt=\"logo\"><h1>" +
         rng.pick(std::vector<std::string>{"Sign in to continue", "Verify your account", "Session expired",
                                           "Confirm your login"}) +
         "</h1>" + form_html(p.form, p.target, rng) +
         "<p><a href=\"#\">Forgot password?</a></p></div></div><footer><p>" +
         rng.pick(std::vector<std::string>{"All rights reserved.", "Secure connection", "Privacy and terms"}) +
         "</p></footer></body>";
}

inline std::string document_body(const PageSpec& p, detail::Rng& rng) {
  return "<body><div class=\"wrap\"><div class=\"panel\"><h1>Verify your identity</h1><p>" +
         rng.pick(std::vector<std::string>{"To restore access, upload a photo of your passport.",
                                           "Your account is limited until we confirm who you are.",
                                           "Upload a valid document to continue."}) +
         "</p>" + form_html(FormSlot::Document, p.target, rng) + "</div></div></body>";
}

inline std::string fake404_body(const PageSpec& p, detail::Rng& rng) {
  return "<body><div class=\"error\"><h1>" + p.message + "</h1><p>" +
         rng.pick(std::vector<std::string>{"Please check the address.", "Try again later.", "Return to the home page."}) +
         "</p><a href=\"/\">Home</a></div><div style=\"display:none\" id=\"p" + hex_token(rng, 6) + "\">" +
         form_html(FormSlot::Credentials, p.target, rng) + "</div></body>";
}

/// The credential form exists only as a string until the captcha is solved.
inline std::string captcha_body(const PageSpec& p, detail::Rng& rng) {
  return "<body><div class=\"captcha-box\"><h1>" +
         rng.pick(std::vector<std::string>{"Checking your browser", "Please confirm you are human",
                                           "One more step"}) +
         "</h1><div class=\"g-recaptcha\" data-sitekey=\"" + hex_token(rng, 20) +
         "\"></div></div><script>var f='<form action=\"" + p.target +
         "\" method=\"post\"><input type=\"email\" name=\"email\"><input type=\"password\" name=\"pass\">"
         "<button>Sign in</button></form>';function onSolved(){document.body.innerHTML=f;}</script></body>";
}

inline std::string redirect_stub(const PageSpec& p) {
  return "<!DOCTYPE html><html><head><title>" + p.title + "</title><script>window.location.replace(\"" + p.target +
         "\");</script></head><body></body></html>";
}

}  // namespace detail_synth

/// Renders one page. The template fixes the element structure; the RNG
/// only varies text, attributes and which form fields appear.
inline std::string render_page(const PageSpec& p, detail::Rng& rng) {
  using namespace detail_synth;
  if (p.kind == TemplateKind::RedirectStub) return redirect_stub(p);
  std::string body;
  switch (p.kind) {
    case TemplateKind::Shop: body = shop_body(p, rng); break;
    case TemplateKind::News: body = news_body(p, rng); break;
    case TemplateKind::Portal: body = portal_body(p, rng); break;
    case TemplateKind::Login: body = login_body(p, rng); break;
    case TemplateKind::DocumentUpload: body = document_body(p, rng); break;
    case TemplateKind::Fake404: body = fake404_body(p, rng); break;
    case TemplateKind::CaptchaShell: body = captcha_body(p, rng); break;
    case TemplateKind::RedirectStub: break;
  }
  std::string head = head_html(p, rng);
  if (p.kind == TemplateKind::CaptchaShell) {
    head.insert(head.size() - 7, "<script src=\"https://www.google.com/recaptcha/api.js\"></script>");
  }
  return "<!DOCTYPE html><html lang=\"en\">" + head + body + "</html>";
}

/// A page of the given template with default form and text.
inline std::string sample_page(TemplateKind kind, std::uint64_t seed,
                               std::optional<FormSlot> form = std::nullopt) {
  detail::Rng rng(seed);
  PageSpec p;
  p.kind = kind;
  p.form = form.value_or(kind == TemplateKind::Login ? FormSlot::Credentials : FormSlot::Search);
  p.brand = detail_synth::capitalize(rng.pick(detail_synth::adjectives()) + rng.pick(detail_synth::nouns()));
  p.title = p.brand + " | Home";
  return render_page(p, rng);
}

// ---------------------------------------------------------------------------
// Corpus

struct GeneratedPage {
  EvidenceBundle bundle;
  std::optional<Trend> trend;  // none for benign pages
  TemplateKind template_kind = TemplateKind::Shop;
  /// T2 only: the benign template the page copies.
  std::optional<TemplateKind> cloned_from;
  /// T2 only: the legitimate page the clone was made from.
  std::optional<std::string> clone_source_html;

  [[nodiscard]] Label label() const { return *bundle.label; }
};

struct Corpus {
  CorpusConfig config;
  std::vector<GeneratedPage> pages;
  std::array<std::size_t, kTrendCount> trend_counts{};
};

namespace detail_synth {

struct HostingService {
  std::string domain;
  bool path_tenant;  // tenant lives in the path instead of a subdomain
  int created_year;
  unsigned created_month;
  unsigned created_day;
  int rank;
};

inline const std::vector<HostingService>& hosting_services() {
  static const std::vector<HostingService> v{
      {"ddns.net", false, 1999, 12, 7, 2},        {"000webhostapp.com", false, 2015, 3, 10, 3},
      {"co.vu", false, 2012, 5, 2, 5},            {"sites.google.com", true, 1997, 9, 15, 1},
      {"vercel.app", false, 2018, 7, 23, 4},      {"branch.io", false, 2014, 1, 9, 2},
  };
  return v;
}

inline const evidence::Timestamp& base_time() {
  static const evidence::Timestamp t = *evidence::parse_timestamp("2021-06-01T00:00:00Z");
  return t;
}

inline std::string whois_date_line(evidence::Date d, std::size_t style) {
  const std::chrono::year_month_day ymd{d};
  const int y = static_cast<int>(ymd.year());
  const unsigned m = static_cast<unsigned>(ymd.month());
  const unsigned day = static_cast<unsigned>(ymd.day());
  static constexpr std::array<const char*, 12> kMon{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  char buf[96];
  switch (style % 4) {
    case 0: std::snprintf(buf, sizeof(buf), "Creation Date: %04d-%02u-%02uT08:14:55Z", y, m, day); break;
    case 1: std::snprintf(buf, sizeof(buf), "Registered on: %02u-%s-%04d", day, kMon[m - 1], y); break;
    case 2: std::snprintf(buf, sizeof(buf), "Registration Time: %04d-%02u-%02u 10:22:31", y, m, day); break;
    default: std::snprintf(buf, sizeof(buf), "Created On: %02u/%02u/%04d", day, m, y); break;
  }
  return buf;
}

inline evidence::WhoisRecord make_whois(const std::string& domain, evidence::Date created, detail::Rng& rng) {
  std::string up = detail::to_lower(domain);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const std::string raw = "Domain Name: " + up + "\nRegistry Domain ID: " + hex_token(rng, 10) +
                          "_DOMAIN\nRegistrar WHOIS Server: whois.registrar.example\n" +
                          whois_date_line(created, rng.below(4)) +
                          "\nRegistrar: Example Registrar LLC\nName Server: NS1." + up + "\n";
  return evidence::whois_record_from_raw(raw, evidence::default_creation_tags());
}

inline evidence::Recorded<evidence::ReputationVerdict> reputation(bool flagged) {
  evidence::ReputationVerdict v;
  v.flagged = flagged;
  v.source = "synthetic-blocklist";
  if (flagged) v.detail = "SOCIAL_ENGINEERING";
  return evidence::Recorded<evidence::ReputationVerdict>::present(v);
}

inline evidence::Recorded<evidence::RankInfo> ranked(int top) {
  evidence::RankInfo r;
  r.present_in_index = true;
  r.top_rank = top;
  r.match_count = 10 - top + 1;
  return evidence::Recorded<evidence::RankInfo>::present(r);
}

inline evidence::Recorded<evidence::RankInfo> unranked() { return evidence::Recorded<evidence::RankInfo>::present({}); }

class Generator {
 public:
  explicit Generator(const CorpusConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  Corpus run() {
    Corpus c;
    c.config = cfg_;
    c.trend_counts = trend_counts(cfg_);
    for (std::size_t i = 0; i < cfg_.n_benign; ++i) c.pages.push_back(benign());
    std::vector<Trend> plan;
    for (std::size_t t = 0; t < kTrendCount; ++t) plan.insert(plan.end(), c.trend_counts[t], static_cast<Trend>(t));
    rng_.shuffle(plan);
    for (Trend t : plan) c.pages.push_back(phishing(t));
    return c;
  }

 private:
  // ---- shared pieces

  evidence::Timestamp next_time() { return base_time() + std::chrono::seconds{37 * static_cast<long long>(serial_++)}; }

  evidence::Date days_before(evidence::Timestamp t, long long days) {
    return std::chrono::floor<std::chrono::days>(t) - std::chrono::days{days};
  }

  std::string unique(const std::function<std::string()>& make) {
    for (;;) {
      auto url = make();
      if (urls_.insert(evidence::bundle_key(url)).second) return url;
    }
  }

  std::string benign_label() { return rng_.pick(adjectives()) + rng_.pick(nouns()); }

  std::string phish_label() {
    std::string s = rng_.pick(phish_words());
    const auto parts = rng_.between(1, 2);
    for (long long i = 0; i < parts; ++i) s += "-" + rng_.pick(phish_words());
    if (rng_.chance(0.5)) s += std::to_string(rng_.between(1, 999));
    return s;
  }

  std::string phish_host() {
    if (rng_.chance(0.08)) {
      return std::to_string(rng_.between(23, 212)) + "." + std::to_string(rng_.between(0, 255)) + "." +
             std::to_string(rng_.between(0, 255)) + "." + std::to_string(rng_.between(1, 254));
    }
    std::string host;
    if (rng_.chance(0.4)) host = rng_.pick(std::vector<std::string>{"www.", "login.", "secure.", "account.mail."});
    return host + phish_label() + "." + rng_.pick(phish_tlds());
  }

  std::string phish_path() {
    return rng_.pick(std::vector<std::string>{"signin/", "account/verify.php", "wp-content/login/index.html",
                                              "update/billing", "auth/session", "secure/login.html"}) +
           (rng_.chance(0.5) ? "?session=" + hex_token(rng_, 8) : std::string());
  }

  std::string credential_title() {
    return rng_.pick(std::vector<std::string>{"Sign in", "Account verification", "Secure login", "Mail - Log in",
                                              "Confirm your identity", "Update your details"});
  }

  EvidenceBundle bundle(std::string url, Label label) {
    EvidenceBundle b;
    b.snapshot.url_initial = url;
    b.snapshot.url_final = std::move(url);
    b.snapshot.http_status = 200;
    b.snapshot.fetched_at = next_time();
    b.label = label;
    return b;
  }

  void set_page(EvidenceBundle& b, std::string html) {
    b.snapshot.html_initial = html;
    b.snapshot.html_rendered = std::move(html);
  }

  // ---- benign

  GeneratedPage benign() {
    GeneratedPage g;
    const bool tenant = rng_.chance(cfg_.benign_host_fraction);
    const auto& service = rng_.pick(hosting_services());
    std::string label;
    std::string domain;
    const auto url = unique([&] {
      label = benign_label();
      if (tenant) {
        domain = service.domain;
        return service.path_tenant ? "https://" + service.domain + "/view/" + label + "/"
                                   : "https://" + label + "." + service.domain + "/";
      }
      domain = label + "." + rng_.pick(benign_tlds());
      return "https://www." + domain + "/" + rng_.pick(std::vector<std::string>{"", "", "shop/", "news/latest", "about"});
    });
    g.bundle = bundle(url, Label::Benign);
    const auto t = g.bundle.snapshot.fetched_at;

    PageSpec p;
    p.brand = capitalize(label);
    const bool login = rng_.chance(cfg_.benign_login_fraction);
    p.kind = login ? TemplateKind::Portal : rng_.pick(std::vector<TemplateKind>{TemplateKind::Shop, TemplateKind::News,
                                                                               TemplateKind::Portal});
    p.form = login ? FormSlot::BenignLogin : FormSlot::Search;
    p.title = p.brand + " | " + rng_.pick(std::vector<std::string>{"Home", "Welcome", "Official site", "Latest"});
    g.template_kind = p.kind;
    set_page(g.bundle, render_page(p, rng_));

    g.bundle.whois = evidence::Recorded<evidence::WhoisRecord>::present(
        make_whois(domain, days_before(t, rng_.between(2 * 365, 20 * 365)), rng_));
    g.bundle.rank = ranked(static_cast<int>(rng_.between(1, 10)));
    g.bundle.reputation = reputation(false);
    g.bundle.reputation_initial = reputation(false);
    g.bundle.notes.push_back("synthetic benign template=" + std::string(template_name(p.kind)));
    return g;
  }

  // ---- phishing

  GeneratedPage phishing(Trend trend) {
    GeneratedPage g;
    g.trend = trend;
    switch (trend) {
      case Trend::BenignHost: benign_host(g); break;
      case Trend::DomClone: dom_clone(g); break;
      case Trend::HiddenFinal: hidden_final(g); break;
      case Trend::IdentityDocs: identity_docs(g); break;
      case Trend::FakeInvalid: fake_invalid(g); break;
    }
    auto& b = g.bundle;
    if (trend != Trend::BenignHost) {
      const auto& url = b.snapshot.url_final;
      const auto host_start = url.find("://") + 3;
      const auto host = url.substr(host_start, url.find('/', host_start) - host_start);
      if (urlkit::is_ipv4(host)) {
        b.whois = evidence::Recorded<evidence::WhoisRecord>::absent("ip host " + host);
      } else if (rng_.chance(0.1)) {
        b.whois = evidence::Recorded<evidence::WhoisRecord>::absent("NoRecord: no match for domain");
      } else {
        b.whois = evidence::Recorded<evidence::WhoisRecord>::present(
            make_whois(host, days_before(b.snapshot.fetched_at, rng_.between(0, 90)), rng_));
      }
      b.rank = unranked();
    }
    const bool listed = rng_.chance(0.15);
    b.reputation = reputation(listed);
    b.reputation_initial = reputation(listed && trend != Trend::HiddenFinal);
    b.notes.push_back("synthetic phishing trend=" + trend_name(trend) +
                      " template=" + std::string(template_name(g.template_kind)));
    return g;
  }

  /// Same-host redirect that some kits add after the first request.
  void maybe_path_redirect(EvidenceBundle& b) {
    if (!rng_.chance(0.3)) return;
    auto& f = b.snapshot.url_final;
    f += (f.find('?') == std::string::npos ? "?" : "&") + std::string("id=") + hex_token(rng_, 12);
  }

  void benign_host(GeneratedPage& g) {
    const auto& service = rng_.pick(hosting_services());
    const auto url = unique([&] {
      const auto tenant = phish_label();
      return (service.path_tenant ? "https://" + service.domain + "/view/" + tenant + "/"
                                  : "https://" + tenant + "." + service.domain + "/") +
             rng_.pick(std::vector<std::string>{"", "login.html", "index.php", "signin/"});
    });
    g.bundle = bundle(url, Label::Phishing);
    PageSpec p;
    p.kind = TemplateKind::Login;
    p.form = FormSlot::Credentials;
    p.title = credential_title();
    p.brand = "Account";
    p.target = "post.php";
    g.template_kind = p.kind;
    set_page(g.bundle, render_page(p, rng_));
    maybe_path_redirect(g.bundle);
    // The hosting service's own registration and rank.
    const auto created = *evidence::make_date(service.created_year, service.created_month, service.created_day);
    g.bundle.whois = evidence::Recorded<evidence::WhoisRecord>::present(make_whois(service.domain, created, rng_));
    g.bundle.rank = ranked(service.rank);
  }

  void dom_clone(GeneratedPage& g) {
    const auto url = unique([&] { return "https://" + phish_host() + "/" + phish_path(); });
    g.bundle = bundle(url, Label::Phishing);
    PageSpec p;
    p.kind = rng_.pick(std::vector<TemplateKind>{TemplateKind::Shop, TemplateKind::News, TemplateKind::Portal});
    p.brand = capitalize(benign_label());
    p.title = p.brand + " | " + rng_.pick(std::vector<std::string>{"Sign in", "Home", "My account"});
    p.form = FormSlot::Search;
    // Source and clone are rendered from the same RNG state, so they share
    // all text and differ only in the form.
    const auto fork = rng_.next();
    detail::Rng source_rng(fork);
    g.clone_source_html = render_page(p, source_rng);
    p.form = FormSlot::Credentials;
    p.target = "https://" + phish_host() + "/collect.php";
    detail::Rng clone_rng(fork);
    g.template_kind = p.kind;
    g.cloned_from = p.kind;
    set_page(g.bundle, render_page(p, clone_rng));
    maybe_path_redirect(g.bundle);
  }

  void hidden_final(GeneratedPage& g) {
    std::string final_url;
    const auto url = unique([&] {
      return "https://" + rng_.pick(adjectives()) + std::to_string(rng_.between(1, 99)) + "." +
             rng_.pick(std::vector<std::string>{"com", "net", "info", "me"}) + "/" + hex_token(rng_, 6);
    });
    final_url = "https://" + phish_host() + "/" + phish_path();
    while (textmetrics::levenshtein(url, final_url) <= 30) final_url += "/" + hex_token(rng_, 8);
    g.bundle = bundle(url, Label::Phishing);
    PageSpec stub;
    stub.kind = TemplateKind::RedirectStub;
    stub.title = "Loading";
    stub.target = final_url;
    g.bundle.snapshot.html_initial = render_page(stub, rng_);

    PageSpec p;
    const bool docs = rng_.chance(0.3);
    p.kind = docs ? TemplateKind::DocumentUpload : TemplateKind::Login;
    p.form = docs ? FormSlot::Document : (rng_.chance(0.5) ? FormSlot::Credentials : FormSlot::CredentialsCard);
    p.title = credential_title();
    p.target = "next.php";
    g.template_kind = p.kind;
    g.bundle.snapshot.html_rendered = render_page(p, rng_);
    g.bundle.snapshot.url_final = final_url;
  }

  void identity_docs(GeneratedPage& g) {
    const auto url = unique([&] { return "https://" + phish_host() + "/" + phish_path(); });
    g.bundle = bundle(url, Label::Phishing);
    PageSpec p;
    p.kind = TemplateKind::DocumentUpload;
    p.form = FormSlot::Document;
    p.title = rng_.pick(std::vector<std::string>{"Identity verification", "Account limited", "Verify your identity"});
    p.target = "upload.php";
    g.template_kind = p.kind;
    set_page(g.bundle, render_page(p, rng_));
    maybe_path_redirect(g.bundle);
  }

  void fake_invalid(GeneratedPage& g) {
    const auto url = unique([&] { return "https://" + phish_host() + "/" + phish_path(); });
    g.bundle = bundle(url, Label::Phishing);
    PageSpec p;
    p.target = "auth.php";
    if (rng_.chance(0.5)) {
      p.kind = TemplateKind::Fake404;
      p.message = rng_.pick(std::vector<std::string>{"Page Not Found 404", "404 Not Found",
                                                     "This page is no longer available",
                                                     "The page you requested does not exist", "Oops! Page not exist"});
      p.title = rng_.pick(std::vector<std::string>{"404", "Error", "Not available"});
    } else {
      p.kind = TemplateKind::CaptchaShell;
      p.title = rng_.pick(std::vector<std::string>{"Security check", "Just a moment", "Verification"});
    }
    g.template_kind = p.kind;
    set_page(g.bundle, render_page(p, rng_));
    maybe_path_redirect(g.bundle);
  }

  const CorpusConfig& cfg_;
  detail::Rng rng_;
  std::size_t serial_ = 0;
  std::set<std::string> urls_;
};

}  // namespace detail_synth

/// Deterministic labeled corpus: the same config always yields the same
/// bundles, byte for byte once serialized.
inline Corpus generate(const CorpusConfig& config) {
  config.validate();
  return detail_synth::Generator(config).run();
}

inline nlohmann::json manifest_json(const Corpus& c) {
  nlohmann::json trends = nlohmann::json::object();
  std::size_t benign = 0;
  std::size_t phishing = 0;
  std::map<std::string, std::size_t> templates;
  for (std::size_t i = 0; i < kTrendCount; ++i) trends[trend_name(static_cast<Trend>(i))] = c.trend_counts[i];
  for (const auto& p : c.pages) {
    (p.label() == Label::Phishing ? phishing : benign)++;
    ++templates[std::string(template_name(p.template_kind))];
  }
  return {{"generator", kGeneratorVersion},
          {"seed", c.config.seed},
          {"config", config_json(c.config)},
          {"counts", {{"benign", benign}, {"phishing", phishing}, {"trends", trends}, {"templates", templates}}}};
}

inline constexpr std::string_view kManifestName = "synth-manifest.json";

/// Writes every bundle into the replay store and the corpus manifest next
/// to them. Returns the keys in corpus order.
inline std::vector<std::string> write_store(const Corpus& c, const std::filesystem::path& root) {
  evidence::ReplayStore store(root);
  std::vector<std::string> keys;
  keys.reserve(c.pages.size());
  for (const auto& p : c.pages) keys.push_back(store.store(p.bundle));
  write_text_file(root / kManifestName, manifest_json(c).dump(2) + "\n");
  return keys;
}

}  // namespace antiphish::synthcorpus
