#pragma once

#include <array>
#include <cstdint>

namespace ebsde::rng {

// Counter-based generator: every draw is a pure function of (key, counter), so
// path p / step k / component j of any simulation can be regenerated in
// isolation, which the backward regression passes rely on.  The permutation is
// Philox4x64-10 and matches numpy's implementation word for word; the test
// suite pins known-answer vectors produced by numpy.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

// Map one 64-bit word to the open interval (0,1): top 53 bits, offset half an
// ulp so 0 and 1 are unreachable.
double uniform_open01(std::uint64_t word);

// Inverse standard normal CDF (Wichura's PPND16), |error| < 1e-15 over (0,1).
double inverse_normal_cdf(double p);

// One N(0,1) variate addressed by (seed, path, step, component).
double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                   std::uint64_t component);

// One uniform (0,1) variate with the same addressing, for non-Gaussian needs
// (e.g. drawing random policies).
double uniform_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                    std::uint64_t component);

}  // namespace ebsde::rng
