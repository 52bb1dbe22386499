#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "commsense/cell.hpp"
#include "commsense/error.hpp"
#include "commsense/fft.hpp"
#include "commsense/iq.hpp"

namespace commsense {

/// Subframe symbol carrying the primary synchronization signal
/// (last symbol of slot 0 with the normal prefix).
inline constexpr int kPssSubframeSymbol = 6;

/// Frame timing and partial cell identity recovered from the PSS.
struct SyncResult {
    std::ptrdiff_t frame_offset = 0;  ///< first FFT-window sample of the PSS symbol
    int nid2 = 0;                     ///< N_ID^(2), 0..2
    double cfo_hz = 0.0;              ///< fractional carrier frequency offset
    double peak_metric = 0.0;         ///< normalized correlation peak in [0,1]
};

/// Zadoff-Chu primary synchronization sequence (62 entries).
/// Roots 25/29/34 correspond to N_ID^(2) = 0/1/2.
inline std::array<std::complex<double>, 62> generate_pss(int nid2) {
    static constexpr int kRoots[3] = {25, 29, 34};
    if (nid2 < 0 || nid2 > 2) throw DomainError("generate_pss: nid2 must be 0..2");
    const double u = kRoots[nid2];
    std::array<std::complex<double>, 62> d{};
    for (int n = 0; n < 31; ++n) {
        const double phase = -kPi * u * n * (n + 1) / 63.0;
        d[static_cast<std::size_t>(n)] = {std::cos(phase), std::sin(phase)};
    }
    for (int n = 31; n < 62; ++n) {
        const double phase = -kPi * u * (n + 1) * (n + 2) / 63.0;
        d[static_cast<std::size_t>(n)] = {std::cos(phase), std::sin(phase)};
    }
    return d;
}

/// Grid indices occupied by the PSS: the 62 subcarriers around DC
/// (31 on each side, DC itself excluded by the grid numbering).
inline std::vector<int> pss_grid_indices(const CellConfig& cfg) {
    const int mid = cfg.n_subcarriers() / 2;
    std::vector<int> idx(62);
    for (int n = 0; n < 62; ++n) {
        const int offset = n < 31 ? n - 31 : n - 30;  // signed, skips 0
        idx[static_cast<std::size_t>(n)] = offset < 0 ? mid + offset : mid + offset - 1;
    }
    return idx;
}

/// Time-domain PSS symbol (one FFT window, no prefix, IFFT scaling).
inline std::vector<std::complex<double>> pss_waveform(const CellConfig& cfg, int nid2) {
    const auto seq = generate_pss(nid2);
    const auto idx = pss_grid_indices(cfg);
    std::vector<std::complex<double>> bins(static_cast<std::size_t>(cfg.fft_size));
    for (int n = 0; n < 62; ++n)
        bins[static_cast<std::size_t>(cfg.subcarrier_bin(idx[static_cast<std::size_t>(n)]))] =
            seq[static_cast<std::size_t>(n)];
    ifft(bins);
    return bins;
}

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace detail

/**
 * @brief Blind PSS search over a capture.
 *
 * Correlates all three candidate sequences against the capture (via FFT,
 * so long captures stay cheap), normalizes each lag by the windowed signal
 * energy, and keeps the strongest peak. A fractional carrier frequency
 * offset is then read off the cyclic-prefix autocorrelation of the winning
 * symbol. The peak metric is scale-invariant; captures whose best peak
 * stays under `peak_floor` raise "no cell found".
 *
 * A blind capture should span at least half a frame (5 ms) to guarantee a
 * PSS occurrence; the search itself only requires one symbol's worth of
 * samples.
 */
inline SyncResult detect_pss(const IqCapture& capture, const CellConfig& cfg,
                             double peak_floor = 0.5) {
    cfg.validate();
    const auto& x = capture.samples;
    const std::size_t n_fft = static_cast<std::size_t>(cfg.fft_size);
    if (x.size() < n_fft + static_cast<std::size_t>(cfg.cp_length(1)))
        throw DomainError("detect_pss: capture shorter than one OFDM symbol");

    const std::size_t n_lags = x.size() - n_fft + 1;
    const std::size_t m = detail::next_pow2(x.size() + n_fft);

    std::vector<std::complex<double>> xf(m);
    std::copy(x.begin(), x.end(), xf.begin());
    fft(xf);

    // Sliding window energy via prefix sums.
    std::vector<double> prefix(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + std::norm(x[i]);

    double best_metric_sq = -1.0;
    std::size_t best_lag = 0;
    int best_nid2 = 0;
    std::vector<std::complex<double>> work(m);
    for (int nid2 = 0; nid2 < 3; ++nid2) {
        const auto p = pss_waveform(cfg, nid2);
        double p_energy = 0.0;
        for (const auto& v : p) p_energy += std::norm(v);

        std::fill(work.begin(), work.end(), std::complex<double>{});
        std::copy(p.begin(), p.end(), work.begin());
        fft(work);
        for (std::size_t i = 0; i < m; ++i) work[i] = xf[i] * std::conj(work[i]);
        ifft(work);

        for (std::size_t t = 0; t < n_lags; ++t) {
            const double window_energy = prefix[t + n_fft] - prefix[t];
            if (window_energy <= 0.0) continue;
            const double metric_sq = std::norm(work[t]) / (window_energy * p_energy);
            if (metric_sq > best_metric_sq) {
                best_metric_sq = metric_sq;
                best_lag = t;
                best_nid2 = nid2;
            }
        }
    }

    SyncResult result;
    result.frame_offset = static_cast<std::ptrdiff_t>(best_lag);
    result.nid2 = best_nid2;
    result.peak_metric = best_metric_sq <= 0.0 ? 0.0 : std::sqrt(std::min(best_metric_sq, 1.0));
    if (result.peak_metric < peak_floor)
        throw PipelineError("detect_pss: no cell found (best correlation peak " +
                            std::to_string(result.peak_metric) + " below floor " +
                            std::to_string(peak_floor) + ")");

    // Fractional CFO from the prefix autocorrelation of the winning symbol.
    // Only the prefix interior is correlated: the edge samples would mix in
    // neighboring symbols whenever the peak sits a few samples off.
    const std::size_t cp = static_cast<std::size_t>(cfg.cp_length(kPssSubframeSymbol));
    const std::size_t margin = 8;
    if (best_lag >= cp && best_lag + n_fft <= x.size() && cp > 2 * margin) {
        std::complex<double> acc{};
        for (std::size_t i = margin; i < cp - margin; ++i)
            acc += std::conj(x[best_lag - cp + i]) * x[best_lag - cp + i + n_fft];
        result.cfo_hz = std::arg(acc) / (2.0 * kPi) * cfg.subcarrier_spacing_hz;
    }
    return result;
}

} // namespace commsense
