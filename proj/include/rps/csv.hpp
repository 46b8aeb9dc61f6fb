#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "rps/errors.hpp"

namespace rps {

// 17 significant digits: doubles survive a text round trip bit for bit.
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_csv(const std::string& file) {
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot open '" + file + "' for writing");
    return out;
}

}  // namespace rps
