#include "rps/wiener.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "rps/rng.hpp"

namespace rps {

namespace {

// Quantum for increment quantization: a power of two about 24 binary digits
// below sqrt(h_fine).  All increments are exact multiples, so sums of up to
// 2^24 of them stay below 2^53 quanta and are computed without rounding.
double quantum_for(double h_fine) {
    int e = 0;
    std::frexp(std::sqrt(h_fine), &e);  // sqrt(h) in [2^(e-1), 2^e)
    return std::ldexp(1.0, e - 24);
}

double quantized_increment(double h_fine, double q,
                           std::uint64_t seed, std::uint64_t stream,
                           std::int64_t counter, std::int64_t component) {
    const double z = normal_variate(seed, stream, counter, component);
    return std::nearbyint(z * std::sqrt(h_fine) / q) * q;
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

void GridSpec::validate() const {
    if (!(span > 0.0) || !std::isfinite(span) || !std::isfinite(t0))
        throw ConfigError("grid: span must be positive and finite");
    if (levels < 0 || levels > kMaxLevels)
        throw ConfigError("grid: levels must lie in [0, " + std::to_string(kMaxLevels) + "]");
}

BrownianPath BrownianPath::generate(const GridSpec& grid, int noise_dim,
                                    std::uint64_t seed, std::uint64_t stream_id,
                                    std::size_t memory_budget) {
    grid.validate();
    if (noise_dim < 1) throw ConfigError("grid: noise_dim must be >= 1");
    const std::int64_t n = grid.step_count();
    const std::size_t bytes = static_cast<std::size_t>(n) * noise_dim * sizeof(double);
    if (bytes > memory_budget)
        throw ResourceError("increment array of " + std::to_string(bytes) +
                            " bytes exceeds the memory budget of " +
                            std::to_string(memory_budget));

    BrownianPath p;
    p.grid_ = grid;
    p.seed_ = seed;
    p.stream_id_ = stream_id;
    p.increments_.resize(noise_dim, n);
    const double h = grid.h_fine();
    const double q = quantum_for(h);
    for (std::int64_t j = 0; j < n; ++j)
        for (int c = 0; c < noise_dim; ++c)
            p.increments_(c, j) = quantized_increment(h, q, seed, stream_id, j, c);
    return p;
}

Vec BrownianPath::increment(std::int64_t j) const {
    if (j < 0 || j >= increment_count())
        throw ConfigError("path: increment index out of range");
    return increments_.col(j);
}

Vec BrownianPath::increment_sum(std::int64_t first, std::int64_t count) const {
    if (count < 0 || first < 0 || first + count > increment_count())
        throw ConfigError("path: increment range out of window");
    Vec s = Vec::Zero(noise_dim());
    for (std::int64_t j = first; j < first + count; ++j) s += increments_.col(j);
    return s;
}

BrownianPath coarsen(const BrownianPath& path, std::int64_t factor) {
    if (!is_power_of_two(factor))
        throw ConfigError("coarsen: factor must be a positive power of two");
    if (factor == 1) {
        // Identity copy, but still derived data: every coarsen result has the
        // same contract (no generator extension), independent of the factor.
        BrownianPath copy = path;
        copy.derived_ = true;
        return copy;
    }
    const std::int64_t n = path.increment_count();
    if (factor > n || n % factor != 0)
        throw ConfigError("coarsen: factor must divide the increment count");

    int shift_levels = 0;
    for (std::int64_t f = factor; f > 1; f >>= 1) ++shift_levels;

    BrownianPath out;
    out.grid_ = path.grid_;
    out.grid_.levels -= shift_levels;
    out.seed_ = path.seed_;
    out.stream_id_ = path.stream_id_;
    out.origin_ = path.origin_;
    out.derived_ = true;
    out.increments_.resize(path.noise_dim(), n / factor);
    for (std::int64_t j = 0; j < n / factor; ++j)
        out.increments_.col(j) = path.increment_sum(j * factor, factor);
    return out;
}

BrownianPath shift(const BrownianPath& path, std::int64_t delta_nodes) {
    if (delta_nodes == 0) return path;
    if (path.derived())
        throw ConfigError("shift: coarsened paths cannot be shifted (no generator contract)");
    BrownianPath out;
    out.grid_ = path.grid_;
    out.seed_ = path.seed_;
    out.stream_id_ = path.stream_id_;
    out.origin_ = path.origin_ + delta_nodes;
    out.derived_ = false;
    const std::int64_t n = path.increment_count();
    const int m = path.noise_dim();
    out.increments_.resize(m, n);
    const double h = path.h_fine();
    const double q = quantum_for(h);
    // Regenerating from counters reproduces in-window columns bit for bit and
    // extends the window where the shift leaves it.
    for (std::int64_t j = 0; j < n; ++j)
        for (int c = 0; c < m; ++c)
            out.increments_(c, j) =
                quantized_increment(h, q, path.seed(), path.stream_id(), out.origin_ + j, c);
    return out;
}

Vec increment_at(const BrownianPath& path, std::int64_t coarse_index, std::int64_t factor) {
    if (!is_power_of_two(factor))
        throw ConfigError("increment_at: factor must be a positive power of two");
    const std::int64_t n = path.increment_count();
    if (n % factor != 0) throw ConfigError("increment_at: factor must divide the increment count");
    if (coarse_index < 0 || coarse_index >= n / factor)
        throw ConfigError("increment_at: coarse index out of range");
    return path.increment_sum(coarse_index * factor, factor);
}

void write_path_dump(const BrownianPath& path, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + file + "' for writing");
    const char magic[4] = {'R', 'P', 'W', '1'};
    const std::uint32_t levels = static_cast<std::uint32_t>(path.grid().levels);
    const double span = path.grid().span;
    const std::uint64_t seed = path.seed();
    const std::uint64_t stream = path.stream_id();
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&levels), 4);
    out.write(reinterpret_cast<const char*>(&span), 8);
    out.write(reinterpret_cast<const char*>(&seed), 8);
    out.write(reinterpret_cast<const char*>(&stream), 8);
    out.write(reinterpret_cast<const char*>(path.raw().data()),
              static_cast<std::streamsize>(path.raw().size() * sizeof(double)));
    if (!out) throw ConfigError("short write to '" + file + "'");
}

PathDump read_path_dump(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + file + "'");
    char magic[4];
    PathDump d;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&d.levels), 4);
    in.read(reinterpret_cast<char*>(&d.span), 8);
    in.read(reinterpret_cast<char*>(&d.seed), 8);
    in.read(reinterpret_cast<char*>(&d.stream_id), 8);
    if (!in || std::memcmp(magic, "RPW1", 4) != 0)
        throw ConfigError("'" + file + "' is not a path dump");
    if (d.levels > static_cast<std::uint32_t>(GridSpec::kMaxLevels))
        throw ConfigError("path dump header corrupt (levels)");
    in.seekg(0, std::ios::end);
    const std::int64_t payload = static_cast<std::int64_t>(in.tellg()) - 32;
    in.seekg(32, std::ios::beg);
    const std::int64_t steps = std::int64_t{1} << d.levels;
    if (payload <= 0 || payload % static_cast<std::int64_t>(steps * sizeof(double)) != 0)
        throw ConfigError("path dump payload size inconsistent with header");
    const std::int64_t m = payload / static_cast<std::int64_t>(steps * sizeof(double));
    d.increments.resize(m, steps);
    in.read(reinterpret_cast<char*>(d.increments.data()), payload);
    if (!in) throw ConfigError("short read from '" + file + "'");
    return d;
}

}  // namespace rps
