#pragma once

#include <cstdio>
#include <string>

namespace ssiter::csv {

/// 17 significant digits; parses back to the same double.
inline std::string real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace ssiter::csv
