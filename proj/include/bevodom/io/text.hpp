#pragma once

// Small helpers shared by the text parsers.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bevodom/errors.hpp"

namespace bevodom::io {

/// Splits on '\n', dropping a trailing '\r' from each line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

/// Fields separated by any run of the given delimiter characters.
inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  std::string_view delims = " \t") {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    pos = line.find_first_not_of(delims, pos);
    if (pos == std::string_view::npos) break;
    std::size_t end = line.find_first_of(delims, pos);
    if (end == std::string_view::npos) end = line.size();
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

/// Comma-separated fields with surrounding whitespace trimmed; empty fields kept.
inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find(',', pos);
    std::string_view f = line.substr(pos, end == std::string_view::npos ? end : end - pos);
    const std::size_t a = f.find_first_not_of(" \t");
    const std::size_t b = f.find_last_not_of(" \t");
    out.push_back(a == std::string_view::npos ? std::string_view{} : f.substr(a, b - a + 1));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "not a number: '" + std::string(s) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value");
  return v;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace bevodom::io
