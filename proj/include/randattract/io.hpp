#pragma once

#include <cstdio>
#include <string>

namespace randattract {

/// Fixed 17-significant-digit rendering; the same double always prints the
/// same bytes.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace randattract
