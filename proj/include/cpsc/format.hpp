#pragma once

#include <charconv>
#include <string>

namespace cpsc {

/// Shortest decimal text that reads back to exactly `value`.
inline std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

}  // namespace cpsc
