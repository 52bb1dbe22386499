// Synthesizes one downlink capture, recovers timing with the PSS detector
// and prints the channel magnitude estimated at the pilot positions.

#include <iostream>

#include "commsense/commsense.hpp"

int main() {
    using namespace commsense;

    ScenarioConfig scenario;
    scenario.snapshots_per_category = 1;
    CellConfig cell;

    const int category = 3;  // 7 persons with the default category map
    const auto [capture, truth] = synth_iq(scenario, cell, category, 0);
    std::cout << "capture: " << capture.samples.size() << " samples at "
              << capture.sample_rate_hz / 1e6 << " Msps\n";

    const auto sync = detect_pss(capture, cell);
    std::cout << "sync: frame offset " << sync.frame_offset << " (truth "
              << truth.pss_frame_offset << "), nid2 " << sync.nid2 << ", peak "
              << sync.peak_metric << ", cfo " << sync.cfo_hz << " Hz\n";

    const auto grid = demodulate_ofdm(capture, sync, cell);
    const auto csi = estimate_csi(grid, cell);
    std::cout << "csi: " << csi.values.size() << " pilot magnitudes, first five:";
    for (int i = 0; i < 5; ++i) std::cout << " " << csi.values[i];
    std::cout << "\n";
    return 0;
}
