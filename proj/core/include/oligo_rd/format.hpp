#pragma once

#include <cstdio>
#include <string>

namespace oligo_rd {

/// Fixed 12-significant-digit rendering used by every text and CSV writer.
inline std::string format_number(double v, int digits = 12) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Round-trips a double through its 12-digit rendering.
inline double round_to_digits(double v, int digits = 12) {
  return std::stod(format_number(v, digits));
}

}  // namespace oligo_rd
