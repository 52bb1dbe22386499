#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "commsense/cell.hpp"
#include "commsense/error.hpp"
#include "commsense/fft.hpp"
#include "commsense/iq.hpp"
#include "commsense/pss.hpp"

namespace commsense {

/// One subframe of demodulated resource elements, indexed by
/// (subframe symbol, grid subcarrier).
struct ResourceGrid {
    int n_symbols = 0;
    int n_subcarriers = 0;
    std::vector<std::complex<double>> re;

    ResourceGrid() = default;
    ResourceGrid(int symbols, int subcarriers)
        : n_symbols(symbols),
          n_subcarriers(subcarriers),
          re(static_cast<std::size_t>(symbols) * static_cast<std::size_t>(subcarriers)) {}

    std::complex<double>& at(int symbol, int subcarrier) {
        return re[index(symbol, subcarrier)];
    }
    const std::complex<double>& at(int symbol, int subcarrier) const {
        return re[index(symbol, subcarrier)];
    }

private:
    std::size_t index(int symbol, int subcarrier) const {
        if (symbol < 0 || symbol >= n_symbols || subcarrier < 0 || subcarrier >= n_subcarriers)
            throw DomainError("resource grid index out of range");
        return static_cast<std::size_t>(symbol) * static_cast<std::size_t>(n_subcarriers) +
               static_cast<std::size_t>(subcarrier);
    }
};

/// Samples each FFT window is pulled forward into the cyclic prefix. The
/// advance absorbs small late timing errors from the correlator (the prefix
/// then still covers the window) and is undone by an exact per-bin phase
/// rotation, so an aligned capture demodulates unchanged.
inline constexpr int kTimingAdvance = 4;

/**
 * @brief Demodulates the synchronized subframe into a resource grid.
 *
 * The PSS sits in the last symbol of the subframe's first slot, so the
 * subframe starts `symbol_window_start(6)` samples before the reported
 * frame offset. Each symbol is corrected for the estimated carrier
 * frequency offset, stripped of its prefix and transformed with the FFT
 * window backed off `kTimingAdvance` samples into the prefix; the occupied
 * subcarriers are collected DC-free in increasing frequency order.
 */
inline ResourceGrid demodulate_ofdm(const IqCapture& capture, const SyncResult& sync,
                                    const CellConfig& cfg) {
    cfg.validate();
    const std::ptrdiff_t subframe_start =
        sync.frame_offset - cfg.symbol_window_start(kPssSubframeSymbol);
    const std::ptrdiff_t first_needed =
        subframe_start + cfg.symbol_window_start(0) - kTimingAdvance;
    const std::ptrdiff_t last_needed =
        subframe_start + cfg.samples_per_subframe() - kTimingAdvance;
    if (first_needed < 0 || last_needed > static_cast<std::ptrdiff_t>(capture.samples.size()))
        throw DataError("demodulate_ofdm: insufficient samples, the subframe around frame offset " +
                        std::to_string(sync.frame_offset) + " spans [" +
                        std::to_string(first_needed) + ", " + std::to_string(last_needed) +
                        ") of a " + std::to_string(capture.samples.size()) + "-sample capture");

    const double phase_per_sample = -2.0 * kPi * sync.cfo_hz / cfg.sample_rate_hz;
    ResourceGrid grid(CellConfig::kSymbolsPerSubframe, cfg.n_subcarriers());
    std::vector<std::complex<double>> window(static_cast<std::size_t>(cfg.fft_size));
    for (int l = 0; l < CellConfig::kSymbolsPerSubframe; ++l) {
        const std::ptrdiff_t start =
            subframe_start + cfg.symbol_window_start(l) - kTimingAdvance;
        for (int i = 0; i < cfg.fft_size; ++i) {
            // The CFO ramp is anchored at the subframe start so all symbols
            // share one phase reference.
            const double phase =
                phase_per_sample * static_cast<double>(start - subframe_start + i);
            const std::complex<double> rot{std::cos(phase), std::sin(phase)};
            window[static_cast<std::size_t>(i)] =
                capture.samples[static_cast<std::size_t>(start + i)] * rot;
        }
        fft(window);
        for (int k = 0; k < cfg.n_subcarriers(); ++k) {
            const int bin = cfg.subcarrier_bin(k);
            // Undo the deliberate advance: a cyclic shift by `a` samples is
            // a per-bin rotation of exp(-2 pi i k a / N).
            const double undo =
                2.0 * kPi * static_cast<double>(bin) * kTimingAdvance /
                static_cast<double>(cfg.fft_size);
            grid.at(l, k) = window[static_cast<std::size_t>(bin)] *
                            std::complex<double>{std::cos(undo), std::sin(undo)};
        }
    }
    return grid;
}

} // namespace commsense
