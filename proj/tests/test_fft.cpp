#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "commsense/fft.hpp"
#include "commsense/rng.hpp"

using commsense::fft;
using commsense::ifft;
using commsense::kPi;
using commsense::Rng;
using cvec = std::vector<std::complex<double>>;

namespace {

// Direct O(n^2) transform used as the reference.
cvec naive_dft(const cvec& x) {
    const std::size_t n = x.size();
    cvec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double a = -2.0 * kPi * static_cast<double>(k * t) / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(a), std::sin(a));
        }
        out[k] = acc;
    }
    return out;
}

double max_abs_diff(const cvec& a, const cvec& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

cvec random_signal(std::size_t n, std::uint64_t tag) {
    auto rng = Rng::keyed(1234, tag);
    cvec x(n);
    for (auto& v : x) v = rng.complex_normal();
    return x;
}

} // namespace

TEST_CASE("fft matches the direct transform on random input") {
    for (const std::size_t n : {1u, 2u, 4u, 8u, 64u, 256u, 1024u}) {
        auto x = random_signal(n, n);
        const auto expected = naive_dft(x);
        fft(x);
        REQUIRE(max_abs_diff(x, expected) < 1e-9 * static_cast<double>(n));
    }
}

TEST_CASE("fft of a single tone is an impulse at the tone bin") {
    const std::size_t n = 128;
    const std::size_t bin = 37;
    cvec x(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double a = 2.0 * kPi * static_cast<double>(bin * t) / static_cast<double>(n);
        x[t] = {std::cos(a), std::sin(a)};
    }
    fft(x);
    for (std::size_t k = 0; k < n; ++k) {
        const double expected = k == bin ? static_cast<double>(n) : 0.0;
        REQUIRE(std::abs(x[k] - std::complex<double>(expected, 0.0)) < 1e-9);
    }
}

TEST_CASE("ifft inverts fft to round-trip precision") {
    auto x = random_signal(512, 99);
    const auto original = x;
    fft(x);
    ifft(x);
    REQUIRE(max_abs_diff(x, original) < 1e-12);
}

TEST_CASE("ifft includes the 1/N factor") {
    cvec x(16, {1.0, 0.0});
    ifft(x);
    // Inverse of an all-ones spectrum is a unit impulse at t = 0.
    REQUIRE(std::abs(x[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
    for (std::size_t t = 1; t < x.size(); ++t) REQUIRE(std::abs(x[t]) < 1e-12);
}

TEST_CASE("non power-of-two sizes are rejected") {
    cvec x(12);
    REQUIRE_THROWS_AS(fft(x), commsense::DomainError);
    cvec empty;
    REQUIRE_THROWS_AS(fft(empty), commsense::DomainError);
}

TEST_CASE("parseval energy is preserved up to the transform scale") {
    auto x = random_signal(256, 7);
    double time_energy = 0.0;
    for (const auto& v : x) time_energy += std::norm(v);
    fft(x);
    double freq_energy = 0.0;
    for (const auto& v : x) freq_energy += std::norm(v);
    REQUIRE(freq_energy / static_cast<double>(x.size()) ==
            Catch::Approx(time_energy).epsilon(1e-12));
}
