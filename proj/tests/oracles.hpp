#pragma once

// Independent reference implementations used only by tests. None of these
// share code with the library paths they check.

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// Full (n+1)x(m+1) edit matrix over code-point vectors.
template <typename T>
std::size_t edit_matrix(const std::vector<T>& x, const std::vector<T>& y) {
  std::vector<std::vector<std::size_t>> d(x.size() + 1, std::vector<std::size_t>(y.size() + 1));
  for (std::size_t i = 0; i <= x.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= y.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
  }
  return d[x.size()][y.size()];
}

/// The recursive head/tail definition, memoized on suffix offsets.
template <typename T>
class RecursiveEditDistance {
 public:
  RecursiveEditDistance(const std::vector<T>& x, const std::vector<T>& y) : x_(x), y_(y) {}

  std::size_t operator()() { return nu(0, 0); }

 private:
  std::size_t nu(std::size_t i, std::size_t j) {
    const std::size_t rx = x_.size() - i;
    const std::size_t ry = y_.size() - j;
    if (rx == 0) return ry;
    if (ry == 0) return rx;
    auto key = std::make_pair(i, j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::size_t r;
    if (x_[i] == y_[j]) {
      r = nu(i + 1, j + 1);
    } else {
      r = 1 + std::min({nu(i + 1, j), nu(i, j + 1), nu(i + 1, j + 1)});
    }
    memo_[key] = r;
    return r;
  }

  const std::vector<T>& x_;
  const std::vector<T>& y_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo_;
};

/// Code points of a UTF-8 string, decoded independently of the library.
inline std::vector<unsigned> code_points(const std::string& s) {
  std::vector<unsigned> out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    int extra = c < 0x80 ? 0 : c < 0xE0 ? 1 : c < 0xF0 ? 2 : 3;
    unsigned cp = extra == 0 ? c : extra == 1 ? (c & 0x1F) : extra == 2 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k <= extra; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += 1 + extra;
  }
  return out;
}

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  return edit_matrix(code_points(a), code_points(b));
}

}  // namespace oracle
