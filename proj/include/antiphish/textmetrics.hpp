#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "antiphish/error.hpp"

namespace antiphish::textmetrics {

/// Decodes UTF-8 into Unicode scalar values. Malformed sequences decode to
/// U+FFFD one byte at a time, so every input has a well-defined length.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    const unsigned char b0 = byte(i);
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    }
    bool ok = len != 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      if ((byte(i + k) & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(U'\uFFFD');
      ++i;
    }
  }
  return out;
}

inline std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

/// Replaces malformed sequences with U+FFFD; valid input comes back unchanged.
inline std::string sanitize_utf8(std::string_view s) { return encode_utf8(decode_utf8(s)); }

/// Edit distance over arbitrary equality-comparable sequences, using the
/// two-row dynamic-programming table.
template <typename Seq>
std::size_t levenshtein_seq(const Seq& x, const Seq& y) {
  const std::size_t n = std::size(x);
  const std::size_t m = std::size(y);
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1);
  std::vector<std::size_t> cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  auto xi = std::begin(x);
  for (std::size_t i = 1; i <= n; ++i, ++xi) {
    cur[0] = i;
    auto yj = std::begin(y);
    for (std::size_t j = 1; j <= m; ++j, ++yj) {
      const std::size_t subst = prev[j - 1] + (*xi == *yj ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

/// Minimum number of single-character insertions, deletions and
/// substitutions turning x into y, counted over Unicode scalar values.
inline std::size_t levenshtein(std::string_view x, std::string_view y) {
  return levenshtein_seq(decode_utf8(x), decode_utf8(y));
}

template <typename Seq>
double normalized_similarity_seq(const Seq& x, const Seq& y) {
  const std::size_t longest = std::max(std::size(x), std::size(y));
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_seq(x, y)) / static_cast<double>(longest);
}

/// 1 - levenshtein / max length; 1 when both strings are empty.
inline double normalized_similarity(std::string_view x, std::string_view y) {
  return normalized_similarity_seq(decode_utf8(x), decode_utf8(y));
}

struct CorrelationResult {
  double coefficient = 0.0;
  std::size_t n = 0;
};

/// Sample Pearson correlation coefficient.
inline CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(Errc::LengthMismatch, "textmetrics",
                std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw Error(Errc::TooFewSamples, "textmetrics", "need at least 2 samples");
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(xs.begin(), xs.end(), finite) || !std::all_of(ys.begin(), ys.end(), finite)) {
    throw Error(Errc::NonFiniteInput, "textmetrics", "non-finite sample");
  }
  const auto constant = [](std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>{}) == v.end();
  };
  if (constant(xs) || constant(ys)) {
    throw Error(Errc::ZeroVariance, "textmetrics", "constant sequence");
  }
  const double n = static_cast<double>(xs.size());
  const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // The 1/(n-1) factors of the sample covariance and deviations cancel.
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ZeroVariance, "textmetrics", "variance underflow");
  const double r = sxy / std::sqrt(sxx * syy);
  return {std::clamp(r, -1.0, 1.0), xs.size()};
}

}  // namespace antiphish::textmetrics
