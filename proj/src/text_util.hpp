#pragma once

#include <cstdio>
#include <string>

namespace fairsim {

/// Fixed short formatting for CSV output; 12 significant digits.
inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

}  // namespace fairsim
