// Builds a small synthetic CSI dataset, fits the feature extractor, then
// calibrates the occupancy detector and scores the crowd-size classifier.

#include <cstdint>
#include <iostream>
#include <vector>

#include "commsense/commsense.hpp"

int main() {
    using namespace commsense;

    ScenarioConfig scenario;
    scenario.snapshots_per_category = 150;
    CellConfig cell;

    const auto dataset = synth_csi_dataset(scenario, cell);
    std::cout << "dataset: " << dataset.rows() << " snapshots x " << dataset.dim
              << " pilots\n";

    auto model = fit_pca(dataset, 3);
    std::vector<double> pc1(dataset.rows());
    for (std::size_t r = 0; r < dataset.rows(); ++r)
        pc1[r] = project(model, dataset.row(r)).scores[0];
    model.pc1_range = fit_score_range(pc1);

    std::vector<double> scores(dataset.rows());
    std::vector<std::uint8_t> is_empty(dataset.rows());
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        scores[r] = model.pc1_range->normalize(pc1[r]);
        is_empty[r] = dataset.label(r) == 1 ? 1 : 0;
    }
    const auto cal = calibrate(sweep_threshold(scores, is_empty), scenario.day_id);
    std::cout << "detector: threshold " << cal.threshold << " ("
              << orientation_name(cal.orientation) << "), min error "
              << cal.min_error_percent << "%\n";

    Split split;
    split.train = 50;
    split.test = 100;
    const auto grid = accuracy_grid(dataset, {split}, 3);
    std::cout << "sizing: " << 100.0 * grid[0].accuracy << "% correct over "
              << grid[0].confusion.total() << " held-out snapshots\n";
    return 0;
}
