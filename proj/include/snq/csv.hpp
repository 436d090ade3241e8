#pragma once

#include <charconv>
#include <string>

namespace snq {

// Shortest round-trip decimal form, locale-independent ('.' decimal point).
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace snq
