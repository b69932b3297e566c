#pragma once

#include <cstdio>
#include <string>

namespace mottsim {

// Decimal form with enough digits to round-trip a double exactly.
inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace mottsim
