#pragma once

#include <cstdio>
#include <string>

namespace pmn {

/// Locale-independent, round-trippable number formatting for CSV output.
inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace pmn
