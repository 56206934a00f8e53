#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "antiphish/detail/strings.hpp"

// Small error-tolerant HTML parser. It is not a full HTML5 tree builder: it
// covers the recovery rules that matter for structure comparison (implied
// html/head/body, void elements, auto-closing of p/li/option/table cells,
// raw-text elements, stray end tags) and keeps attributes and text so the
// content inspector can work on the same tree.
namespace antiphish::html {

struct Node {
  enum class Kind { Element, Text };

  Kind kind = Kind::Element;
  std::string name;  // lowercase tag for elements
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // text nodes only
  std::vector<std::unique_ptr<Node>> children;

  [[nodiscard]] bool is_element() const { return kind == Kind::Element; }

  /// Attribute value by lowercase name, empty when absent.
  [[nodiscard]] std::string attr(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return v;
    }
    return {};
  }

  [[nodiscard]] bool has_attr(std::string_view key) const {
    return std::any_of(attributes.begin(), attributes.end(), [&](const auto& kv) { return kv.first == key; });
  }
};

struct Document {
  std::unique_ptr<Node> root;  // the <html> element, null when nothing was recovered
};

namespace detail_html {

inline bool in(std::string_view name, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), name) != set.end();
}

inline bool is_void(std::string_view name) {
  return in(name, {"area", "base", "br", "col", "embed", "hr", "img", "input", "keygen", "link", "meta",
                   "param", "source", "track", "wbr"});
}

inline bool is_raw_text(std::string_view name) {
  return in(name, {"script", "style", "textarea", "title", "xmp", "noembed", "noframes"});
}

inline bool is_head_content(std::string_view name) {
  return in(name, {"base", "link", "meta", "title", "style", "script", "noscript"});
}

// Elements whose start tag closes an open <p>.
inline bool closes_p(std::string_view name) {
  return in(name, {"address", "article", "aside", "blockquote", "center", "details", "dialog", "dir", "div",
                   "dl", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
                   "h6", "header", "hgroup", "hr", "li", "main", "menu", "nav", "ol", "p", "pre", "section",
                   "summary", "table", "ul", "dd", "dt"});
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string decode_entities(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 8> kNamed{{
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}, {"copy", "\xC2\xA9"},
      {"reg", "\xC2\xAE"},
  }};
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    auto ref = s.substr(i + 1, semi - i - 1);
    bool done = false;
    if (!ref.empty() && ref[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = ref.size() > 1;
      const bool hex = ok && (ref[1] == 'x' || ref[1] == 'X');
      for (std::size_t k = hex ? 2 : 1; ok && k < ref.size(); ++k) {
        const char c = ref[k];
        int digit = -1;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        if (digit < 0 || cp > 0x10FFFF) ok = false;
        else cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(digit);
      }
      if (ok && ref.size() > (hex ? 2u : 1u)) {
        append_utf8(out, cp);
        done = true;
      }
    } else {
      for (const auto& [name, value] : kNamed) {
        if (ref == name) {
          out += value;
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

struct Token {
  enum class Type { StartTag, EndTag, Text };
  Type type = Type::Text;
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  bool self_closing = false;
  std::string text;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        if (!markup()) text_until_next_lt(true);
      } else {
        text_until_next_lt(false);
      }
    }
    flush_text();
    return std::move(tokens_);
  }

 private:
  static bool alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

  void text_until_next_lt(bool include_first) {
    std::size_t start = pos_;
    if (include_first) ++pos_;
    auto next = src_.find('<', pos_);
    pos_ = next == std::string_view::npos ? src_.size() : next;
    pending_text_.append(src_.substr(start, pos_ - start));
  }

  void flush_text() {
    if (pending_text_.empty()) return;
    Token t;
    t.type = Token::Type::Text;
    t.text = decode_entities(pending_text_);
    tokens_.push_back(std::move(t));
    pending_text_.clear();
  }

  // Returns false when the '<' does not open markup and is literal text.
  bool markup() {
    auto rest = src_.substr(pos_);
    if (rest.starts_with("<!--")) {
      flush_text();
      auto end = src_.find("-->", pos_ + 4);
      pos_ = end == std::string_view::npos ? src_.size() : end + 3;
      return true;
    }
    if (rest.size() >= 2 && (rest[1] == '!' || rest[1] == '?')) {
      flush_text();
      auto end = src_.find('>', pos_);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      return true;
    }
    if (rest.size() >= 3 && rest[1] == '/' && alpha(rest[2])) {
      flush_text();
      pos_ += 2;
      Token t;
      t.type = Token::Type::EndTag;
      t.name = read_name();
      auto end = src_.find('>', pos_);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
      tokens_.push_back(std::move(t));
      return true;
    }
    if (rest.size() >= 3 && rest[1] == '/' && rest[2] == '>') {
      pos_ += 3;  // "</>" is dropped
      return true;
    }
    if (rest.size() >= 2 && alpha(rest[1])) {
      flush_text();
      ++pos_;
      start_tag();
      return true;
    }
    return false;
  }

  std::string read_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && !detail::is_space(src_[pos_]) && src_[pos_] != '/' && src_[pos_] != '>') ++pos_;
    return detail::to_lower(src_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < src_.size() && detail::is_space(src_[pos_])) ++pos_;
  }

  void start_tag() {
    Token t;
    t.type = Token::Type::StartTag;
    t.name = read_name();
    while (pos_ < src_.size()) {
      skip_space();
      if (pos_ >= src_.size()) break;
      const char c = src_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '>') {
          t.self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      std::size_t start = pos_;
      while (pos_ < src_.size() && !detail::is_space(src_[pos_]) && src_[pos_] != '=' && src_[pos_] != '>' &&
             !(src_[pos_] == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>')) {
        ++pos_;
      }
      std::string key = detail::to_lower(src_.substr(start, pos_ - start));
      if (key.empty()) {
        ++pos_;
        continue;
      }
      std::string value;
      skip_space();
      if (pos_ < src_.size() && src_[pos_] == '=') {
        ++pos_;
        skip_space();
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
          const char quote = src_[pos_++];
          auto end = src_.find(quote, pos_);
          if (end == std::string_view::npos) end = src_.size();
          value = decode_entities(src_.substr(pos_, end - pos_));
          pos_ = std::min(end + 1, src_.size());
        } else {
          std::size_t vstart = pos_;
          while (pos_ < src_.size() && !detail::is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
          value = decode_entities(src_.substr(vstart, pos_ - vstart));
        }
      }
      const bool duplicate = std::any_of(t.attributes.begin(), t.attributes.end(),
                                         [&](const auto& kv) { return kv.first == key; });
      if (!duplicate) t.attributes.emplace_back(std::move(key), std::move(value));
    }
    const std::string name = t.name;
    tokens_.push_back(std::move(t));
    // A trailing "/" does not close non-void elements, raw-text ones included.
    if (is_raw_text(name)) raw_text(name);
  }

  void raw_text(const std::string& name) {
    const std::string close = "</" + name;
    std::size_t search = pos_;
    std::size_t end = std::string_view::npos;
    while (true) {
      auto lt = src_.find("</", search);
      if (lt == std::string_view::npos) break;
      if (detail::starts_with_icase(src_.substr(lt), close)) {
        auto after = lt + close.size();
        if (after >= src_.size() || detail::is_space(src_[after]) || src_[after] == '>' || src_[after] == '/') {
          end = lt;
          break;
        }
      }
      search = lt + 2;
    }
    if (end == std::string_view::npos) end = src_.size();
    auto body = src_.substr(pos_, end - pos_);
    if (!body.empty()) {
      Token t;
      t.type = Token::Type::Text;
      t.text = (name == "script" || name == "style") ? std::string(body) : decode_entities(body);
      tokens_.push_back(std::move(t));
    }
    pos_ = end;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::string pending_text_;
  std::vector<Token> tokens_;
};

class TreeBuilder {
 public:
  Document build(std::vector<Token> tokens) {
    for (auto& t : tokens) {
      switch (t.type) {
        case Token::Type::Text: text(std::move(t.text)); break;
        case Token::Type::StartTag: start(t); break;
        case Token::Type::EndTag: end(t.name); break;
      }
    }
    Document doc;
    doc.root = std::move(root_);
    return doc;
  }

 private:
  Node* current() { return stack_.empty() ? nullptr : stack_.back(); }

  Node* append_element(Node* parent, const std::string& name,
                       std::vector<std::pair<std::string, std::string>> attrs = {}) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Element;
    n->name = name;
    n->attributes = std::move(attrs);
    Node* raw = n.get();
    parent->children.push_back(std::move(n));
    return raw;
  }

  void ensure_html(const std::vector<std::pair<std::string, std::string>>* attrs = nullptr) {
    if (root_) return;
    root_ = std::make_unique<Node>();
    root_->name = "html";
    if (attrs) root_->attributes = *attrs;
    stack_ = {root_.get()};
  }

  void ensure_head() {
    ensure_html();
    if (head_ || body_) return;
    head_ = append_element(root_.get(), "head");
    stack_ = {root_.get(), head_};
  }

  void ensure_body() {
    ensure_html();
    if (body_) return;
    body_ = append_element(root_.get(), "body");
    stack_ = {root_.get(), body_};
  }

  bool in_head() const { return head_ && !body_ && stack_.size() >= 2 && stack_[1] == head_; }

  void text(std::string s) {
    const bool blank = std::all_of(s.begin(), s.end(), detail::is_space);
    Node* cur = current();
    const bool in_raw = cur && detail_html::is_raw_text(cur->name);
    if (blank && !in_raw && (!body_ || !cur)) return;
    if (!in_raw && (!body_ || in_head())) {
      if (blank) return;
      ensure_body();
    }
    cur = current();
    if (!cur->children.empty() && !cur->children.back()->is_element()) {
      cur->children.back()->text += s;
      return;
    }
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Text;
    n->text = std::move(s);
    cur->children.push_back(std::move(n));
  }

  void close_if_open(std::initializer_list<std::string_view> names, std::initializer_list<std::string_view> barriers) {
    for (std::size_t i = stack_.size(); i-- > 2;) {
      const auto& n = stack_[i]->name;
      if (detail_html::in(n, names)) {
        stack_.resize(i);
        return;
      }
      if (detail_html::in(n, barriers)) return;
    }
  }

  void start(Token& t) {
    const std::string& name = t.name;
    if (name == "html") {
      if (!root_) ensure_html(&t.attributes);
      return;
    }
    if (name == "head") {
      ensure_html();
      if (!head_ && !body_) ensure_head();
      return;
    }
    if (name == "body") {
      ensure_html();
      if (!body_) {
        body_ = append_element(root_.get(), "body", std::move(t.attributes));
        stack_ = {root_.get(), body_};
      }
      return;
    }
    if (!body_ && detail_html::is_head_content(name)) {
      ensure_head();
      if (!in_head()) stack_ = {root_.get(), head_};
    } else if (!body_ || in_head()) {
      ensure_body();
    }

    if (detail_html::closes_p(name)) close_if_open({"p"}, {"button", "table", "td", "th"});
    if (name == "li") close_if_open({"li"}, {"ul", "ol"});
    if (name == "dt" || name == "dd") close_if_open({"dt", "dd"}, {"dl"});
    if (name == "option") close_if_open({"option"}, {"select", "datalist"});
    if (name == "tr") close_if_open({"tr"}, {"table", "tbody", "thead", "tfoot"});
    if (name == "td" || name == "th") close_if_open({"td", "th"}, {"tr", "table"});
    if (name == "tbody" || name == "thead" || name == "tfoot") close_if_open({"tbody", "thead", "tfoot"}, {"table"});

    if (name == "tr" && current()->name == "table") stack_.push_back(append_element(current(), "tbody"));

    Node* n = append_element(current(), name, std::move(t.attributes));
    if (!detail_html::is_void(name)) stack_.push_back(n);
  }

  void end(const std::string& name) {
    if (name == "html" || name == "body") return;
    if (name == "head") {
      if (in_head()) stack_.resize(1);
      return;
    }
    if (name == "p" && body_) {
      const bool open = std::any_of(stack_.begin(), stack_.end(), [](Node* n) { return n->name == "p"; });
      if (!open) {
        // Stray </p> produces an empty paragraph, as browsers do.
        append_element(current(), "p");
        return;
      }
    }
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->name == name) {
        if (stack_[i] == body_ || stack_[i] == head_) return;
        stack_.resize(i);
        return;
      }
    }
  }

  std::unique_ptr<Node> root_;
  Node* head_ = nullptr;
  Node* body_ = nullptr;
  std::vector<Node*> stack_;
};

}  // namespace detail_html

/// Parses a document. The root is null when no element or text survives
/// (empty input, only comments or whitespace).
inline Document parse(std::string_view source) {
  detail_html::Tokenizer tokenizer(source);
  detail_html::TreeBuilder builder;
  return builder.build(tokenizer.run());
}

/// Preorder walk over every node.
template <typename F>
void walk(const Node& node, F&& visit) {
  visit(node);
  for (const auto& child : node.children) walk(*child, visit);
}

}  // namespace antiphish::html
