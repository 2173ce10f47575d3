#pragma once

#include <cstdio>
#include <string>

namespace bvpop {

/// Decimal rendering with 17 significant digits (round-trips a double).
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace bvpop
