#pragma once

// Two-sided Brownian motion on dyadic grids.
//
// A path stores one increment per fine step, each an exact multiple of a
// power-of-two quantum chosen from h_fine.  Because the quantum is shared,
// every block sum and prefix sum is computed without rounding, so coarsening
// conserves endpoints exactly and Wiener shifts satisfy the prefix-sum
// identity bit for bit.

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "rps/errors.hpp"

namespace rps {

using Vec = Eigen::VectorXd;

struct GridSpec {
    double t0 = 0.0;    // leftmost node
    double span = 0.0;  // covered length; finest step is span / 2^levels
    int levels = 0;     // dyadic refinement depth, 0 <= levels <= kMaxLevels

    // Exactness of quantized increment sums is guaranteed up to 2^24 steps.
    static constexpr int kMaxLevels = 24;

    void validate() const;
    double h_fine() const { return std::ldexp(span, -levels); }
    std::int64_t step_count() const { return std::int64_t{1} << levels; }
    std::int64_t node_count() const { return step_count() + 1; }
    double time_at(std::int64_t j) const { return t0 + static_cast<double>(j) * h_fine(); }
};

class BrownianPath {
  public:
    static constexpr std::size_t kDefaultBudget = std::size_t{1} << 30;  // bytes

    // Fresh path: increment j ~ N(0, h_fine I), keyed on (seed, stream_id, j).
    static BrownianPath generate(const GridSpec& grid, int noise_dim,
                                 std::uint64_t seed, std::uint64_t stream_id,
                                 std::size_t memory_budget = kDefaultBudget);

    const GridSpec& grid() const { return grid_; }
    int noise_dim() const { return static_cast<int>(increments_.rows()); }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    double h_fine() const { return grid_.h_fine(); }
    std::int64_t increment_count() const { return increments_.cols(); }

    // Generator counter of local increment 0.  0 for fresh paths; shifted paths
    // regenerate from offset counters.  Coarsened paths are derived data and
    // cannot be extended through the generator.
    std::int64_t origin() const { return origin_; }
    bool derived() const { return derived_; }

    Vec increment(std::int64_t j) const;
    // Left-to-right sum of increments [first, first+count).
    Vec increment_sum(std::int64_t first, std::int64_t count) const;
    // W at node j with W(t0) = 0.
    Vec value_at(std::int64_t node) const { return increment_sum(0, node); }
    Vec terminal() const { return increment_sum(0, increment_count()); }

    const Eigen::MatrixXd& raw() const { return increments_; }  // noise_dim x steps

  private:
    BrownianPath() = default;
    GridSpec grid_;
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::int64_t origin_ = 0;
    bool derived_ = false;
    Eigen::MatrixXd increments_;

    friend BrownianPath coarsen(const BrownianPath&, std::int64_t);
    friend BrownianPath shift(const BrownianPath&, std::int64_t);
};

// Power-of-two block sums: the result lives on the grid with levels reduced by
// log2(factor).  Terminal values are conserved exactly.
BrownianPath coarsen(const BrownianPath& path, std::int64_t factor);

// Wiener shift by delta_nodes fine steps: increment j of the result equals the
// increment at counter origin + delta_nodes + j, extending through the
// generator outside the original window.  For any node j,
//   W_shifted(j) = W(j + delta) - W(delta)
// holds exactly.  Rejected for coarsened paths (no generator contract).
BrownianPath shift(const BrownianPath& path, std::int64_t delta_nodes);

// Increment of the factor-coarsened path at coarse_index, without materializing
// the coarse path.
Vec increment_at(const BrownianPath& path, std::int64_t coarse_index, std::int64_t factor);

// Debug dump: 32-byte header (magic "RPW1", levels u32, span f64, seed u64,
// stream_id u64, little-endian) followed by raw increment doubles in column
// order.  noise_dim is implied by the payload size.
void write_path_dump(const BrownianPath& path, const std::string& file);

struct PathDump {
    std::uint32_t levels = 0;
    double span = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    Eigen::MatrixXd increments;
};

PathDump read_path_dump(const std::string& file);

}  // namespace rps
