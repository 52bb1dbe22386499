#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "commsense/error.hpp"

namespace commsense {

inline constexpr double kPi = 3.14159265358979323846;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 FFT, unnormalized forward kernel exp(-j 2 pi k n / N).
/// The size must be a power of two.
inline void fft(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    if (!is_pow2(n)) throw DomainError("fft: size must be a power of two");
    if (n == 1) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    // One twiddle table for the final stage serves every stage via striding.
    std::vector<std::complex<double>> w(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double a = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
        w[j] = {std::cos(a), std::sin(a)};
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < half; ++j) {
                const auto u = x[i + j];
                const auto v = x[i + j + half] * w[j * stride];
                x[i + j] = u + v;
                x[i + j + half] = u - v;
            }
        }
    }
}

/// In-place inverse FFT including the 1/N factor.
inline void ifft(std::vector<std::complex<double>>& x) {
    for (auto& v : x) v = std::conj(v);
    fft(x);
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : x) v = std::conj(v) * scale;
}

} // namespace commsense
