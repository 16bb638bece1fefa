#pragma once

#include <cmath>
#include <cstdint>

namespace causalkit::rng {

// All randomness in this library flows through SplitMix64. Substreams are
// keyed by index: stream k of master seed s is SplitMix64 seeded with the
// k-th output of SplitMix64(s). Because the SplitMix64 state advances
// linearly, the k-th output is available in O(1), which is what makes
// per-row / per-resample streams independent of iteration order.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// k-th (0-based) output of SplitMix64 seeded with `seed`.
inline std::uint64_t nth_output(std::uint64_t seed, std::uint64_t k) {
    return mix64(seed + (k + 1) * kGolden);
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random mantissa bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (-1, 1).
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

    /// Standard normal via Box-Muller (cosine branch; consumes two uniforms).
    double gaussian() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Laplace with unit variance (scale 1/sqrt(2)).
    double laplace_unit() {
        const double u = uniform01() - 0.5;
        const double b = 1.0 / std::sqrt(2.0);
        const double t = 1.0 - 2.0 * std::abs(u);
        return -b * (u < 0.0 ? -1.0 : 1.0) * std::log(t > 0.0 ? t : 1e-300);
    }

    /// Index in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // 53-bit uniform scaled; n is tiny (row counts), bias negligible and
        // the result is identical on every platform.
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    }

private:
    std::uint64_t state_;
};

/// Dedicated stream for a row / resample / run index under a master seed.
inline Stream substream(std::uint64_t master_seed, std::uint64_t index) {
    return Stream(nth_output(master_seed, index));
}

}  // namespace causalkit::rng
