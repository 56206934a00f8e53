#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "antiphish/detail/strings.hpp"
#include "antiphish/error.hpp"

namespace antiphish {

/// Parses the line-oriented list format shared by the benign-host,
/// suffix-rule, keyword and captcha-marker files: one entry per line,
/// '#' starts a comment, blank lines ignored, surrounding whitespace trimmed.
inline std::vector<std::string> parse_line_list(std::string_view text) {
  std::vector<std::string> entries;
  for (const auto& raw_line : detail::split(text, '\n')) {
    std::string_view line = raw_line;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (!line.empty()) entries.emplace_back(line);
  }
  return entries;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "io", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "io", "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::Io, "io", "short write to " + path.string());
}

inline std::vector<std::string> load_line_list(const std::filesystem::path& path) {
  return parse_line_list(read_text_file(path));
}

}  // namespace antiphish
