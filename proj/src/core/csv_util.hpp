#pragma once

// Small helpers shared by the CSV readers and writers.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "bodyio/error.hpp"

namespace bodyio::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] inline void parse_error(const std::string& file, std::size_t line,
                                     const std::string& what) {
  fail(ErrorKind::Data, file + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view field, const std::string& file, std::size_t line) {
  T value{};
  // from_chars rejects a leading '+'; accept it for hand-written files.
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    parse_error(file, line, "cannot parse '" + std::string(field) + "'");
  }
  return value;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Data, "cannot open " + path);
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write " + path);
  return out;
}

/// printf-style "%.<digits>g".
inline std::string num(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace bodyio::csv
