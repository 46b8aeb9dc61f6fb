#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rps {

// Invalid model parameters, grids, step sizes, CLI/JSON configuration, or
// violated operation preconditions.  CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Increment storage (or similar allocation) would exceed the configured budget.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An integration step produced a non-finite state.  Carries the first node at
// which the trajectory left the finite range; the Monte Carlo drivers attach
// the stream id before propagating.  CLI maps this to exit code 3.
class BlowUpError : public std::runtime_error {
  public:
    BlowUpError(double time, std::int64_t node, std::int64_t stream = -1)
        : std::runtime_error(describe(time, node, stream)),
          time_(time), node_(node), stream_(stream) {}

    double time() const { return time_; }
    std::int64_t node() const { return node_; }       // step index, first bad state
    std::int64_t stream() const { return stream_; }   // -1 when not stream-bound

    BlowUpError with_stream(std::int64_t s) const { return {time_, node_, s}; }

  private:
    static std::string describe(double time, std::int64_t node, std::int64_t stream) {
        std::string s = "numerical blow-up: non-finite state at node " + std::to_string(node) +
                        " (t=" + std::to_string(time) + ")";
        if (stream >= 0) s += " on stream " + std::to_string(stream);
        return s;
    }
    double time_;
    std::int64_t node_;
    std::int64_t stream_;
};

}  // namespace rps
