#pragma once

// Tiny dependency-free SVG line charts for quick visual checks.  All numeric
// artifacts live in the CSV outputs; these are a convenience only.

#include <string>
#include <utility>
#include <vector>

namespace rps {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

void write_line_svg(const std::string& file, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series, bool log_x, bool log_y);

}  // namespace rps
