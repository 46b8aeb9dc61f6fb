#pragma once

// Counter-based random numbers for reproducible Brownian paths.
//
// Every normal variate is a pure function of (seed, stream_id, index, component),
// so paths can be regenerated, extended to negative indices (Wiener shifts), and
// sampled out of order without storing generator state.

#include <array>
#include <cstdint>

namespace rps {

// Philox-4x64, 10 rounds.  Stateless block cipher: 256-bit counter, 128-bit key.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::array<std::uint64_t, 2> key);

// Map 64 random bits to the open interval (0,1): ((w >> 12) + 0.5) * 2^-52.
// Never returns an endpoint, so it is safe to feed into the normal quantile.
double uniform_from_bits(std::uint64_t w);

// Quantile function of the standard normal distribution (rational
// approximation, ~1e-15 absolute accuracy over (0,1)).
double inverse_normal_cdf(double p);

// One standard normal draw keyed on (seed, stream, index, component).
// `index` may be negative; its two's-complement bit pattern is the counter word.
double normal_variate(std::uint64_t seed, std::uint64_t stream,
                      std::int64_t index, std::int64_t component);

}  // namespace rps
