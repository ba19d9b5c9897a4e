#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace qmclock {

/// Locale-independent rendering with a fixed number of significant digits.
inline std::string format_double(double value, int significant = 17) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, significant);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

/// Shortest round-trip rendering, for labels.
inline std::string format_short(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace qmclock
