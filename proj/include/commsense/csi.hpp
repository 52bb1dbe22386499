#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "commsense/cell.hpp"
#include "commsense/crs.hpp"
#include "commsense/error.hpp"
#include "commsense/ofdm.hpp"

namespace commsense {

/// Channel-magnitude snapshot: one value per port-0 reference subcarrier
/// of the subframe's first CRS symbol (2 per resource block, 100 for the
/// default 50 RB carrier).
struct CsiVector {
    std::vector<double> values;
    std::string capture_id;
    std::optional<int> label;
};

/**
 * @brief Least-squares channel estimate at the reference positions.
 *
 * Divides the received resource elements by the known pilot values and
 * coherently averages the co-located reference symbols (slot symbol 0 of
 * both slots, i.e. subframe symbols 0 and 7; the symbol-4 pilots sit on
 * shifted subcarriers and cannot join a same-bin average). The reported
 * CSI is the magnitude of the averaged estimate.
 */
inline CsiVector estimate_csi(const ResourceGrid& grid, const CellConfig& cfg) {
    cfg.validate();
    if (grid.n_subcarriers != cfg.n_subcarriers())
        throw DomainError("estimate_csi: grid width does not match the cell configuration");
    if (grid.n_symbols < 1) throw DomainError("estimate_csi: empty resource grid");

    const auto positions = crs_positions(cfg, 0, 0);
    std::vector<std::complex<double>> h(positions.size());
    int averaged = 0;
    for (int slot = 0; slot < 2; ++slot) {
        const int symbol = slot * CellConfig::kSymbolsPerSlot;
        if (symbol >= grid.n_symbols) break;
        const auto pilots = generate_crs(cfg, slot, 0);
        for (std::size_t m = 0; m < positions.size(); ++m) {
            if (std::abs(pilots[m]) < 1e-12)
                throw PipelineError("estimate_csi: degenerate pilot value");
            h[m] += grid.at(symbol, positions[m]) / pilots[m];
        }
        ++averaged;
    }
    if (averaged == 0) throw DomainError("estimate_csi: grid holds no CRS-bearing symbol");

    CsiVector csi;
    csi.values.resize(h.size());
    for (std::size_t m = 0; m < h.size(); ++m)
        csi.values[m] = std::abs(h[m] / static_cast<double>(averaged));
    return csi;
}

} // namespace commsense
