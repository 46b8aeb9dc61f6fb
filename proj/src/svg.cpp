#include "rps/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "rps/errors.hpp"

namespace rps {

namespace {

constexpr double kW = 720, kH = 480;
constexpr double kL = 80, kR = 20, kT = 40, kB = 60;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void write_line_svg(const std::string& file, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series, bool log_x, bool log_y) {
    auto tx = [log_x](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [log_y](double v) { return log_y ? std::log10(v) : v; };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if ((log_x && !(x > 0)) || (log_y && !(y > 0))) continue;
            x0 = std::min(x0, tx(x)); x1 = std::max(x1, tx(x));
            y0 = std::min(y0, ty(y)); y1 = std::max(y1, ty(y));
        }
    if (!(x1 >= x0) || !(y1 >= y0)) { x0 = y0 = 0; x1 = y1 = 1; }
    if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
    if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }

    auto px = [&](double x) { return kL + (tx(x) - x0) / (x1 - x0) * (kW - kL - kR); };
    auto py = [&](double y) { return kH - kB - (ty(y) - y0) / (y1 - y0) * (kH - kT - kB); };

    std::ofstream out(file);
    if (!out) throw ConfigError("cannot open '" + file + "' for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
        << "' viewBox='0 0 " << kW << ' ' << kH << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='16'>"
        << title << "</text>\n";

    // frame and ticks
    out << "<rect x='" << kL << "' y='" << kT << "' width='" << kW - kL - kR << "' height='"
        << kH - kT - kB << "' fill='none' stroke='black'/>\n";
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = x0 + (x1 - x0) * i / ticks;
        const double fy = y0 + (y1 - y0) * i / ticks;
        const double gx = kL + (kW - kL - kR) * i / ticks;
        const double gy = kH - kB - (kH - kT - kB) * i / ticks;
        const double vx = log_x ? std::pow(10.0, fx) : fx;
        const double vy = log_y ? std::pow(10.0, fy) : fy;
        out << "<line x1='" << gx << "' y1='" << kH - kB << "' x2='" << gx << "' y2='"
            << kH - kB + 5 << "' stroke='black'/>\n"
            << "<text x='" << gx << "' y='" << kH - kB + 20
            << "' text-anchor='middle' font-size='11'>" << fmt(vx) << "</text>\n"
            << "<line x1='" << kL - 5 << "' y1='" << gy << "' x2='" << kL << "' y2='" << gy
            << "' stroke='black'/>\n"
            << "<text x='" << kL - 8 << "' y='" << gy + 4
            << "' text-anchor='end' font-size='11'>" << fmt(vy) << "</text>\n";
    }
    out << "<text x='" << (kL + kW - kR) / 2 << "' y='" << kH - 15
        << "' text-anchor='middle' font-size='13'>" << xlabel << "</text>\n"
        << "<text x='18' y='" << (kT + kH - kB) / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
        << (kT + kH - kB) / 2 << ")'>" << ylabel << "</text>\n";

    int ci = 0;
    for (const auto& s : series) {
        const char* color = kColors[ci % 6];
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : s.points) {
            if ((log_x && !(x > 0)) || (log_y && !(y > 0))) continue;
            out << px(x) << ',' << py(y) << ' ';
        }
        out << "'/>\n";
        if (!s.label.empty())
            out << "<text x='" << kW - kR - 8 << "' y='" << kT + 18 + 16 * ci
                << "' text-anchor='end' font-size='12' fill='" << color << "'>" << s.label
                << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
}

}  // namespace rps
