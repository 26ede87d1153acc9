#pragma once

#include <cstdio>
#include <string>

namespace stochquad {

/// Shortest-like fixed formatting for doubles in CSV output; %.17g guarantees
/// an exact round trip.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace stochquad
