#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "antiphish/detail/strings.hpp"
#include "antiphish/error.hpp"
#include "antiphish/html.hpp"
#include "antiphish/textmetrics.hpp"

namespace antiphish::domkit {

struct SkeletonNode {
  std::string tag;
  std::vector<SkeletonNode> children;

  bool operator==(const SkeletonNode&) const = default;
};

/// Element-only tree of a document: tags kept, text, attributes and
/// comments dropped.
struct DomSkeleton {
  SkeletonNode root;

  bool operator==(const DomSkeleton&) const = default;
};

namespace detail_dom {

inline SkeletonNode to_skeleton(const html::Node& node) {
  SkeletonNode out{node.name, {}};
  for (const auto& child : node.children) {
    if (child->is_element()) out.children.push_back(to_skeleton(*child));
  }
  return out;
}

inline void preorder(const SkeletonNode& n, std::vector<std::string>& out) {
  out.push_back(n.tag);
  for (const auto& c : n.children) preorder(c, out);
}

inline void serialize(const SkeletonNode& n, std::vector<std::string>& out) {
  out.push_back(n.tag);
  if (n.children.empty()) return;
  out.emplace_back("(");
  for (const auto& c : n.children) serialize(c, out);
  out.emplace_back(")");
}

inline bool is_void_tag(std::string_view tag) { return html::detail_html::is_void(tag); }

inline void render(const SkeletonNode& n, std::string& out) {
  out += "<" + n.tag + ">";
  if (is_void_tag(n.tag)) return;
  for (const auto& c : n.children) render(c, out);
  out += "</" + n.tag + ">";
}

}  // namespace detail_dom

inline DomSkeleton extract_skeleton(std::string_view html_source) {
  auto doc = html::parse(html_source);
  if (!doc.root) throw Error(Errc::EmptyDocument, "domkit", "no element recovered");
  return DomSkeleton{detail_dom::to_skeleton(*doc.root)};
}

inline std::vector<std::string> preorder_tags(const DomSkeleton& s) {
  std::vector<std::string> out;
  detail_dom::preorder(s.root, out);
  return out;
}

/// Preorder tag sequence with "(" on descend and ")" on ascend.
inline std::vector<std::string> serialize_skeleton(const DomSkeleton& s) {
  std::vector<std::string> out;
  detail_dom::serialize(s.root, out);
  return out;
}

/// Minimal HTML whose skeleton is `s`.
inline std::string render_skeleton(const DomSkeleton& s) {
  std::string out;
  detail_dom::render(s.root, out);
  return out;
}

inline double skeleton_similarity(const DomSkeleton& a, const DomSkeleton& b) {
  return textmetrics::normalized_similarity_seq(serialize_skeleton(a), serialize_skeleton(b));
}

/// Reporting cut for "structurally similar"; not used by any feature.
inline constexpr double kDefaultSimilarityThreshold = 0.8;

inline bool structurally_similar(const DomSkeleton& a, const DomSkeleton& b,
                                 double threshold = kDefaultSimilarityThreshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(Errc::InvalidArgument, "domkit", "similarity threshold outside [0, 1]");
  }
  return skeleton_similarity(a, b) >= threshold;
}

struct ContentConfig {
  std::vector<std::string> validity_keywords{"no longer available", "not found",     "unpublished",
                                             "does not exist",      "404",           "access forbidden",
                                             "page not found",      "oops! page not exist"};
  std::vector<std::string> captcha_markers{"recaptcha", "captcha", "hcaptcha"};
  std::vector<std::string> card_tokens{"card", "cc-number", "cvv"};
  std::vector<std::string> document_keywords{"passport", "driver licence", "driver license", "id card"};
};

struct ContentProfile {
  std::string title;
  std::size_t password_inputs = 0;
  std::size_t email_inputs = 0;
  std::size_t card_inputs = 0;
  std::size_t document_upload_inputs = 0;
  std::size_t form_count = 0;
  bool fake_invalid = false;
  bool captcha_gated = false;
  std::size_t script_count = 0;

  [[nodiscard]] std::size_t sensitive_inputs() const {
    return password_inputs + email_inputs + card_inputs + document_upload_inputs;
  }

  bool operator==(const ContentProfile&) const = default;
};

namespace detail_dom {

inline bool hidden_text_container(std::string_view tag) {
  return tag == "script" || tag == "style" || tag == "template" || tag == "noscript";
}

inline void collect_text(const html::Node& n, std::string& out) {
  if (!n.is_element()) {
    out += n.text;
    out += ' ';
    return;
  }
  if (hidden_text_container(n.name)) return;
  for (const auto& c : n.children) collect_text(*c, out);
}

// Lowercased, '_'/'-' as spaces, whitespace collapsed.
inline std::string normalize_tokens(std::string_view s) {
  std::string t = detail::to_lower(s);
  std::replace_if(t.begin(), t.end(), [](char c) { return c == '_' || c == '-'; }, ' ');
  return detail::collapse_whitespace(t);
}

inline bool any_token(std::string_view normalized, const std::vector<std::string>& needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](const std::string& k) { return detail::contains_icase(normalized, k); });
}

class Inspector {
 public:
  Inspector(const ContentConfig& cfg, ContentProfile& profile) : cfg_(cfg), p_(profile) {}

  void visit(const html::Node& n, const html::Node* label, const std::string& preceding) {
    if (!n.is_element()) return;
    if (n.name == "form") ++p_.form_count;
    if (n.name == "script") ++p_.script_count;
    if (n.name == "title" && !title_seen_) {
      std::string t;
      for (const auto& c : n.children) {
        if (!c->is_element()) t += c->text;
      }
      p_.title = detail::collapse_whitespace(t);
      title_seen_ = true;
    }
    for (const char* key : {"class", "id", "src"}) {
      if (!captcha_ && any_token(detail::to_lower(n.attr(key)), cfg_.captcha_markers)) captcha_ = true;
    }
    if (n.name == "input") classify_input(n, label, preceding);

    const html::Node* inner_label = n.name == "label" ? &n : label;
    std::string prev;
    for (const auto& c : n.children) {
      visit(*c, inner_label, prev);
      prev.clear();
      collect_text(*c, prev);
    }
  }

  [[nodiscard]] bool captcha_marker_seen() const { return captcha_; }

 private:
  void classify_input(const html::Node& n, const html::Node* label, const std::string& preceding) {
    const std::string type = detail::to_lower(detail::trim(n.attr("type")));
    if (type == "hidden" || type == "submit" || type == "button" || type == "reset" || type == "image" ||
        type == "checkbox" || type == "radio") {
      return;
    }
    const std::string ident = normalize_tokens(n.attr("name") + " " + n.attr("id") + " " + n.attr("autocomplete"));
    std::string near = ident + " " + n.attr("placeholder") + " " + n.attr("aria-label") + " " + n.attr("title") +
                       " " + preceding;
    if (label) collect_text(*label, near);
    near = normalize_tokens(near);

    if (type == "password") {
      ++p_.password_inputs;
    } else if (type == "file" || any_token(near, cfg_.document_keywords)) {
      ++p_.document_upload_inputs;
    } else if (any_token(ident, normalized(cfg_.card_tokens))) {
      ++p_.card_inputs;
    } else if (type == "email" || detail::contains_icase(ident, "email")) {
      ++p_.email_inputs;
    }
  }

  static std::vector<std::string> normalized(const std::vector<std::string>& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(normalize_tokens(s));
    return out;
  }

  const ContentConfig& cfg_;
  ContentProfile& p_;
  bool title_seen_ = false;
  bool captcha_ = false;
};

}  // namespace detail_dom

/// Visible text of a document (script/style content excluded, title
/// included), whitespace-collapsed.
inline std::string visible_text(const html::Document& doc) {
  if (!doc.root) return {};
  std::string raw;
  detail_dom::collect_text(*doc.root, raw);
  return detail::collapse_whitespace(raw);
}

/// Counts input-seeking elements and detects fake-invalid and captcha-gated
/// pages. An empty document yields an all-zero profile.
inline ContentProfile inspect_content(std::string_view html_source, int http_status,
                                      const ContentConfig& cfg = {}) {
  ContentProfile p;
  auto doc = html::parse(html_source);
  if (!doc.root) return p;
  detail_dom::Inspector inspector(cfg, p);
  inspector.visit(*doc.root, nullptr, {});

  if (http_status == 200) {
    const std::string text = detail::to_lower(visible_text(doc));
    p.fake_invalid = std::any_of(cfg.validity_keywords.begin(), cfg.validity_keywords.end(), [&](const auto& k) {
      return text.find(detail::to_lower(detail::collapse_whitespace(k))) != std::string::npos;
    });
  }
  p.captcha_gated = inspector.captcha_marker_seen() && p.password_inputs + p.form_count == 0;
  return p;
}

}  // namespace antiphish::domkit
