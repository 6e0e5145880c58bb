#pragma once
// Deterministic 64-bit generator (splitmix64).  Used wherever randomness is
// needed — scenario paths and test-case generation — so a given seed
// reproduces the identical stream everywhere.  The state transition is the
// one documented in the README.

#include <cmath>
#include <cstdint>

namespace flair {

struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1): top 53 bits, offset half a step so 0 and 1 never occur.
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    uint64_t below(uint64_t n) { return next() % n; }

    // Standard normal via Box-Muller on two fresh uniforms.
    double normal() {
        const double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }
};

}  // namespace flair
