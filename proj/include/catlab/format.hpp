// Locale-independent number formatting for CSV and terminal output.

#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace catlab {

// Shortest decimal form with the given number of significant digits,
// independent of the global locale (std::to_chars never consults it).
inline std::string fmt_g(double x, int digits = 12) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                 std::chars_format::general, digits);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace catlab
