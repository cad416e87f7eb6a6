#pragma once

#include <charconv>
#include <string>

namespace longmat {

/// Shortest-safe text for a double: 17 significant digits, round-trips exactly.
inline std::string format_g17(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace longmat
