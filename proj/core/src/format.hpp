#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace impdens::detail {

// Round-trippable, locale-independent rendering used by every CSV writer.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace impdens::detail
