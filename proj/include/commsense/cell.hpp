#pragma once

#include <cmath>
#include <string>

#include "commsense/error.hpp"

namespace commsense {

enum class CpMode { Normal, Extended };

/**
 * @brief Downlink cell parameters for one LTE carrier.
 *
 * Defaults describe the 10 MHz capture configuration this project targets:
 * 50 resource blocks sampled with a 1024-point FFT at 15 kHz subcarrier
 * spacing, i.e. 15.36 Msps complex baseband. Only antenna port 0 with the
 * normal cyclic prefix is supported.
 */
struct CellConfig {
    int cell_id = 0;  // physical cell identity, 0..503
    int n_rb = 50;
    int fft_size = 1024;
    double subcarrier_spacing_hz = 15000.0;
    double sample_rate_hz = 15.36e6;
    CpMode cp_mode = CpMode::Normal;
    int antenna_port = 0;

    static constexpr int kSymbolsPerSlot = 7;
    static constexpr int kSymbolsPerSubframe = 14;
    static constexpr int kSlotsPerFrame = 20;

    int nid2() const { return cell_id % 3; }
    int n_subcarriers() const { return n_rb * 12; }

    /// Cyclic prefix length in samples; the first symbol of a slot wears the
    /// longer prefix (160/144 at the 2048-point reference size, scaled down).
    int cp_length(int symbol_in_slot) const {
        return (symbol_in_slot == 0 ? 160 : 144) * fft_size / 2048;
    }

    int samples_per_slot() const {
        int n = 0;
        for (int l = 0; l < kSymbolsPerSlot; ++l) n += cp_length(l) + fft_size;
        return n;
    }

    int samples_per_subframe() const { return 2 * samples_per_slot(); }

    /// Sample offset of a subframe symbol's start, prefix included.
    int symbol_start(int subframe_symbol) const {
        if (subframe_symbol < 0 || subframe_symbol >= kSymbolsPerSubframe)
            throw DomainError("symbol_start: subframe symbol out of range");
        int off = subframe_symbol >= kSymbolsPerSlot ? samples_per_slot() : 0;
        for (int l = subframe_symbol % kSymbolsPerSlot, i = 0; i < l; ++i)
            off += cp_length(i) + fft_size;
        return off;
    }

    /// Sample offset of the first FFT-window sample of a subframe symbol.
    int symbol_window_start(int subframe_symbol) const {
        return symbol_start(subframe_symbol) + cp_length(subframe_symbol % kSymbolsPerSlot);
    }

    /// Baseband frequency of a grid subcarrier. Grid indices run 0..12*n_rb-1
    /// from the lowest to the highest frequency; the DC bin is not part of
    /// the grid.
    double subcarrier_frequency_hz(int grid_index) const {
        const int off = signed_offset(grid_index);
        return static_cast<double>(off) * subcarrier_spacing_hz;
    }

    /// FFT bin carrying a grid subcarrier.
    int subcarrier_bin(int grid_index) const {
        const int off = signed_offset(grid_index);
        return off >= 0 ? off : fft_size + off;
    }

    void validate() const {
        if (cell_id < 0 || cell_id > 503) throw DomainError("cell_id must be 0..503");
        if (n_rb <= 0) throw DomainError("n_rb must be positive");
        if (fft_size < 128 || (fft_size & (fft_size - 1)) != 0)
            throw DomainError("fft_size must be a power of two, at least 128");
        if (n_subcarriers() >= fft_size)
            throw DomainError("occupied subcarriers must fit inside the FFT");
        if (subcarrier_spacing_hz <= 0.0) throw DomainError("subcarrier spacing must be positive");
        const double expected_rate = subcarrier_spacing_hz * fft_size;
        if (std::abs(sample_rate_hz - expected_rate) > 1e-6 * expected_rate)
            throw DomainError("sample_rate must equal fft_size * subcarrier_spacing");
        if (cp_mode != CpMode::Normal) throw DomainError("only the normal cyclic prefix is supported");
        if (antenna_port != 0) throw DomainError("only antenna port 0 is supported");
    }

private:
    /// Signed subcarrier offset from DC, skipping the DC bin itself.
    int signed_offset(int grid_index) const {
        if (grid_index < 0 || grid_index >= n_subcarriers())
            throw DomainError("grid index out of range");
        const int centered = grid_index - n_subcarriers() / 2;
        return centered >= 0 ? centered + 1 : centered;
    }
};

} // namespace commsense
