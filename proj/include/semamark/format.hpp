#pragma once

#include <charconv>
#include <string>

namespace semamark {

// Shortest decimal form that parses back to the same double; used by every
// CSV writer so artifacts are both readable and lossless.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace semamark
