#pragma once

#include <cassert>
#include <cstdint>
#include <limits>
#include <random>

namespace cdsm {

// All randomness in the library flows through these helpers. They are
// implemented directly on top of the mt19937_64 word stream so results are
// identical across standard libraries (std::uniform_int_distribution is
// not portable).
using Rng = std::mt19937_64;

/// Unbiased integer in [0, n). n must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    assert(n > 0);
    if (n == 1) return 0;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    for (;;) {
        const std::uint64_t v = rng();
        if (v < limit) return v % n;
    }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cdsm
