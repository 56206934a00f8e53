#pragma once

// Hand-rolled generators for property tests.

#include <string>
#include <vector>

#include "antiphish/detail/rng.hpp"

namespace gen {

/// Random string of up to max_len code points drawn from a mix of ASCII,
/// Latin-1, Cyrillic, CJK and astral-plane characters.
inline std::string mixed_string(antiphish::detail::Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> kAlphabets[] = {
      {"a", "b", "c", "d", "e"},
      {"x", "y", "z", "0", "1", "-", "@", ".", "/"},
      {"\xC3\xA9", "\xC3\xBC", "\xC3\xB1"},           // é ü ñ
      {"\xD0\xB6", "\xD0\xB0", "\xD0\xBE"},           // ж а о
      {"\xE4\xB8\xAD", "\xE6\x96\x87"},               // 中 文
      {"\xF0\x9F\x98\x80", "\xF0\x9F\x94\x92"},       // astral
  };
  const std::size_t len = rng.below(max_len + 1);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    const auto& alphabet = kAlphabets[rng.below(std::size(kAlphabets))];
    out += alphabet[rng.below(alphabet.size())];
  }
  return out;
}

inline std::string ascii_word(antiphish::detail::Rng& rng, std::size_t min_len, std::size_t max_len) {
  static const std::string kLetters = "abcdefghijklmnopqrstuvwxyz";
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(kLetters[rng.below(kLetters.size())]);
  return out;
}

}  // namespace gen
