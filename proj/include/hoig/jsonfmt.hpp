#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace hoig {

/// Formats a JSON number with 9 significant digits. Full precision lives
/// only in the binary formats.
inline std::string json_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string json_number_list(const std::vector<double>& vs) {
    std::string out = "[";
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ",";
        out += json_number(vs[i]);
    }
    out += "]";
    return out;
}

}  // namespace hoig
