/**
 * @file io_util.hpp
 * @brief File and number formatting helpers used by the persistence code
 */

#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "coldstart/error.hpp"

namespace coldstart::detail {

inline std::ifstream open_input(const std::string& path, const char* module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(module, "cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path, const char* module) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(module, "cannot open '" + path + "' for writing");
  return out;
}

inline void finish_output(std::ofstream& out, const std::string& path, const char* module) {
  out.flush();
  if (!out) throw IoError(module, "failed writing '" + path + "'");
}

/// %.17g, enough to round-trip any double.
inline std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace coldstart::detail
