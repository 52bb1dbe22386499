#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace commsense {

/**
 * @brief Counter-based deterministic random source (SplitMix64).
 *
 * Streams are keyed by an arbitrary list of 64-bit fields (seed, day,
 * category, snapshot, stream id, ...). Every draw is a pure function of the
 * key and the number of draws taken so far, so per-snapshot generators can
 * run on any thread in any order and still reproduce a serial run bit for
 * bit. Uniform and Gaussian variates are derived with fixed arithmetic
 * (no std::distribution) to keep the byte streams portable across
 * standard-library implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    /// Derives a stream key by folding the parts into the seed.
    template <typename... Parts>
    static Rng keyed(std::uint64_t seed, Parts... parts) {
        std::uint64_t k = mix(seed + kGamma);
        ((k = mix(k ^ mix(static_cast<std::uint64_t>(parts) + kGamma))), ...);
        return Rng(k);
    }

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform in [0,1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal (Box-Muller); one uniform pair yields two variates.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Shift into (0,1] so the log stays finite.
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly symmetric complex normal with unit total variance.
    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * kInvSqrt2, im * kInvSqrt2};
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr double kPi = 3.14159265358979323846;
    static constexpr double kInvSqrt2 = 0.70710678118654752440;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace commsense
