#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "commsense/cell.hpp"
#include "commsense/error.hpp"

namespace commsense {

/// Largest downlink bandwidth in resource blocks; reference-signal
/// frequency indexing is anchored to this width so narrower carriers see
/// the central slice of one master sequence.
inline constexpr int kMaxDownlinkRb = 110;

/// Discarded warm-up length of the length-31 Gold generator.
inline constexpr std::size_t kGoldFastForward = 1600;

/// Gold sequence c(offset) .. c(offset+count-1). The first m-sequence is
/// seeded with 1, the second with c_init; both use the standard length-31
/// taps (x^31 + x^3 + 1 and x^31 + x^3 + x^2 + x + 1).
inline std::vector<std::uint8_t> gold_sequence(std::uint32_t c_init, std::size_t offset,
                                               std::size_t count) {
    std::uint32_t x1 = 1;
    std::uint32_t x2 = c_init & 0x7FFFFFFFu;
    auto step = [](std::uint32_t& x, std::uint32_t feedback_bit) {
        x = (x >> 1) | (feedback_bit << 30);
    };
    std::vector<std::uint8_t> out(count);
    for (std::size_t n = 0; n < offset + count; ++n) {
        if (n >= offset) out[n - offset] = static_cast<std::uint8_t>((x1 ^ x2) & 1u);
        step(x1, ((x1 >> 3) ^ x1) & 1u);
        step(x2, ((x2 >> 3) ^ (x2 >> 2) ^ (x2 >> 1) ^ x2) & 1u);
    }
    return out;
}

/// Scrambling initializer for port-0 cell reference symbols on slot `ns`,
/// slot symbol `l`, normal prefix.
inline std::uint32_t crs_c_init(int cell_id, int slot, int symbol) {
    const std::uint32_t id = static_cast<std::uint32_t>(cell_id);
    return (1u << 10) * (7u * (static_cast<std::uint32_t>(slot) + 1u) +
                         static_cast<std::uint32_t>(symbol) + 1u) *
               (2u * id + 1u) +
           2u * id + 1u;
}

namespace detail {

inline void check_crs_location(const CellConfig& cfg, int slot, int symbol) {
    cfg.validate();
    if (slot < 0 || slot >= CellConfig::kSlotsPerFrame)
        throw DomainError("CRS slot must be 0..19");
    if (symbol != 0 && symbol != 4)
        throw DomainError("port-0 CRS lives on slot symbols 0 and 4 only");
}

} // namespace detail

/// Grid indices of the port-0 reference symbols in one slot symbol.
/// Every sixth subcarrier carries a pilot, offset by
/// (3 * (symbol != 0) + cell_id) mod 6, giving 2*n_rb pilots per symbol.
inline std::vector<int> crs_positions(const CellConfig& cfg, int slot, int symbol) {
    detail::check_crs_location(cfg, slot, symbol);
    const int v = symbol == 0 ? 0 : 3;
    const int shift = (v + cfg.cell_id) % 6;
    std::vector<int> idx(static_cast<std::size_t>(2 * cfg.n_rb));
    for (std::size_t m = 0; m < idx.size(); ++m) idx[m] = static_cast<int>(6 * m) + shift;
    return idx;
}

/// QPSK pilot values for the port-0 reference symbols of one slot symbol,
/// in the same order as crs_positions. The Gold stream is indexed relative
/// to the widest carrier, so the slice starts 2*(110 - n_rb) bits past the
/// warm-up.
inline std::vector<std::complex<double>> generate_crs(const CellConfig& cfg, int slot,
                                                      int symbol) {
    detail::check_crs_location(cfg, slot, symbol);
    if (cfg.n_rb > kMaxDownlinkRb) throw DomainError("n_rb exceeds the downlink maximum");
    const std::size_t m0 = static_cast<std::size_t>(kMaxDownlinkRb - cfg.n_rb);
    const auto bits = gold_sequence(crs_c_init(cfg.cell_id, slot, symbol),
                                    kGoldFastForward + 2 * m0,
                                    static_cast<std::size_t>(4 * cfg.n_rb));
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    std::vector<std::complex<double>> pilots(static_cast<std::size_t>(2 * cfg.n_rb));
    for (std::size_t m = 0; m < pilots.size(); ++m) {
        pilots[m] = {kInvSqrt2 * (1.0 - 2.0 * bits[2 * m]),
                     kInvSqrt2 * (1.0 - 2.0 * bits[2 * m + 1])};
    }
    return pilots;
}

} // namespace commsense
