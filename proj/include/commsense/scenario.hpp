#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "commsense/category.hpp"
#include "commsense/cell.hpp"
#include "commsense/crs.hpp"
#include "commsense/dataset.hpp"
#include "commsense/error.hpp"
#include "commsense/fft.hpp"
#include "commsense/iq.hpp"
#include "commsense/ofdm.hpp"
#include "commsense/parallel.hpp"
#include "commsense/pss.hpp"
#include "commsense/rng.hpp"

namespace commsense {

enum class Motion { Static, Dynamic };

inline std::string motion_name(Motion m) { return m == Motion::Static ? "static" : "dynamic"; }

inline Motion motion_from_name(const std::string& name) {
    if (name == "static") return Motion::Static;
    if (name == "dynamic") return Motion::Dynamic;
    throw DataError("unknown motion mode '" + name + "' (expected \"static\" or \"dynamic\")");
}

/// Direct-path amplitude decay per person present, in nepers. Bodies
/// standing between the tower and the receiver shave a deterministic slice
/// off the line-of-sight component; this is what separates the occupancy
/// categories on average.
inline constexpr double kBlockagePerPerson = 0.075;

/// Scatter-path power at zero excess delay. Per-snapshot random scatter is
/// what smears each category's CSI cloud.
inline constexpr double kScatterPowerScale = 4e-3;

/// Wall-clock spacing between consecutive snapshots of one category.
inline constexpr double kSnapshotPeriodS = 1e-3;

/// Downlink center frequency stamped into simulated captures.
inline constexpr double kCenterFrequencyHz = 2.35e9;

/**
 * @brief Crowd-channel scenario description.
 *
 * Each category is a person count; the simulator draws
 * `snapshots_per_category` independent channel realizations per category.
 * Person bodies attenuate the direct path and add scatter paths
 * (`base_paths` for the empty room plus `paths_per_person` per person).
 * In dynamic mode each scatter path carries a Doppler shift drawn from
 * +-doppler_max_hz; in static mode all paths stand still. `snr_db` may be
 * infinite to disable measurement noise. Two captures are only comparable
 * when they share `rng_seed` and `day_id`; changing `day_id` redraws every
 * realization while keeping the distribution.
 */
struct ScenarioConfig {
    std::vector<int> categories = {0, 1, 4, 7, 10, 13, 16, 19};
    int snapshots_per_category = 1000;
    Motion motion = Motion::Static;
    int base_paths = 3;
    double paths_per_person = 0.5;
    double delay_spread_s = 1e-6;
    double doppler_max_hz = 10.0;
    double snr_db = 25.0;
    std::uint64_t rng_seed = 0;
    int day_id = 1;

    CategoryMap category_map() const { return CategoryMap(categories); }

    void validate() const {
        CategoryMap map(categories);  // checks non-empty, increasing, non-negative
        (void)map;
        if (snapshots_per_category < 1) throw DomainError("snapshots_per_category must be >= 1");
        if (base_paths < 0) throw DomainError("base_paths must be >= 0");
        if (paths_per_person < 0.0) throw DomainError("paths_per_person must be >= 0");
        if (delay_spread_s < 0.0) throw DomainError("delay_spread_s must be >= 0");
        if (doppler_max_hz < 0.0) throw DomainError("doppler_max_hz must be >= 0");
        if (std::isnan(snr_db)) throw DomainError("snr_db must not be NaN");
        if (day_id < 0) throw DomainError("day_id must be >= 0");
    }
};

inline void to_json(nlohmann::json& j, const ScenarioConfig& cfg) {
    j = nlohmann::json{
        {"categories", cfg.categories},
        {"snapshots_per_category", cfg.snapshots_per_category},
        {"motion", motion_name(cfg.motion)},
        {"base_paths", cfg.base_paths},
        {"paths_per_person", cfg.paths_per_person},
        {"delay_spread_s", cfg.delay_spread_s},
        {"doppler_max_hz", cfg.doppler_max_hz},
        {"rng_seed", cfg.rng_seed},
        {"day_id", cfg.day_id},
    };
    // JSON has no infinity literal; noise-free scenarios say so in words.
    if (std::isinf(cfg.snr_db))
        j["snr_db"] = "inf";
    else
        j["snr_db"] = cfg.snr_db;
}

inline void from_json(const nlohmann::json& j, ScenarioConfig& cfg) {
    cfg = ScenarioConfig{};
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "categories")
                cfg.categories = value.get<std::vector<int>>();
            else if (key == "snapshots_per_category")
                cfg.snapshots_per_category = value.get<int>();
            else if (key == "motion")
                cfg.motion = motion_from_name(value.get<std::string>());
            else if (key == "base_paths")
                cfg.base_paths = value.get<int>();
            else if (key == "paths_per_person")
                cfg.paths_per_person = value.get<double>();
            else if (key == "delay_spread_s")
                cfg.delay_spread_s = value.get<double>();
            else if (key == "doppler_max_hz")
                cfg.doppler_max_hz = value.get<double>();
            else if (key == "snr_db")
                cfg.snr_db = value.is_string() && value.get<std::string>() == "inf"
                                 ? std::numeric_limits<double>::infinity()
                                 : value.get<double>();
            else if (key == "rng_seed")
                cfg.rng_seed = value.get<std::uint64_t>();
            else if (key == "day_id")
                cfg.day_id = value.get<int>();
            else
                throw DataError("unknown scenario key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad scenario config: ") + e.what());
    }
    cfg.validate();
}

namespace stream {
// Sub-stream tags so path draws, measurement noise, transmit payload and
// front-end noise never share random bits.
inline constexpr std::uint64_t kPaths = 1;
inline constexpr std::uint64_t kCsiNoise = 2;
inline constexpr std::uint64_t kIqNoise = 3;
inline constexpr std::uint64_t kPayload = 4;
} // namespace stream

/**
 * @brief One drawn multipath channel.
 *
 * The frequency response is
 *   H(f) = a0 + sum_l g_l * exp(-j 2 pi f tau_l) * exp(j 2 pi nu_l t)
 * with a deterministic direct path a0 = exp(-kBlockagePerPerson * persons)
 * and complex Gaussian scatter gains g_l whose power follows an exponential
 * delay profile.
 */
struct ChannelRealization {
    std::complex<double> a0{1.0, 0.0};
    std::vector<std::complex<double>> gains;
    std::vector<double> delays_s;
    std::vector<double> dopplers_hz;  // empty in static mode
    double time_s = 0.0;

    std::complex<double> h_at(double f_hz) const {
        std::complex<double> h = a0;
        for (std::size_t l = 0; l < gains.size(); ++l) {
            double phase = -2.0 * kPi * f_hz * delays_s[l];
            if (!dopplers_hz.empty()) phase += 2.0 * kPi * dopplers_hz[l] * time_s;
            h += gains[l] * std::complex<double>{std::cos(phase), std::sin(phase)};
        }
        return h;
    }
};

/// Everything the simulator knows about one emitted snapshot; tests check
/// the processing chain against these values.
struct GroundTruth {
    int category_label = 0;  ///< 1-based dataset label
    int persons = 0;
    std::vector<std::complex<double>> h_crs;  ///< channel at the CRS positions
    ChannelRealization channel;
    std::ptrdiff_t pss_frame_offset = -1;  ///< set by synth_iq
};

/// Draws the multipath channel for one (category, snapshot) cell. The draw
/// is a pure function of (rng_seed, day_id, category_index, snapshot_index);
/// static and dynamic modes share path delays and gains and differ only in
/// the Doppler terms.
inline ChannelRealization synth_channel(const ScenarioConfig& cfg, int category_index,
                                        int snapshot_index) {
    cfg.validate();
    if (category_index < 0 || category_index >= static_cast<int>(cfg.categories.size()))
        throw DomainError("category index out of range");
    if (snapshot_index < 0 || snapshot_index >= cfg.snapshots_per_category)
        throw DomainError("snapshot index out of range");

    const int persons = cfg.categories[static_cast<std::size_t>(category_index)];
    const long n_paths =
        std::lround(static_cast<double>(cfg.base_paths) + cfg.paths_per_person * persons);

    auto rng = Rng::keyed(cfg.rng_seed, cfg.day_id, category_index, snapshot_index,
                          stream::kPaths);
    ChannelRealization ch;
    ch.a0 = std::exp(-kBlockagePerPerson * persons);
    ch.time_s = snapshot_index * kSnapshotPeriodS;
    ch.gains.reserve(static_cast<std::size_t>(n_paths));
    ch.delays_s.reserve(static_cast<std::size_t>(n_paths));
    for (long l = 0; l < n_paths; ++l) {
        const double tau = rng.uniform(0.0, cfg.delay_spread_s);
        const double ratio = cfg.delay_spread_s > 0.0 ? tau / cfg.delay_spread_s : 0.0;
        const double power = kScatterPowerScale * std::exp(-ratio);
        ch.delays_s.push_back(tau);
        ch.gains.push_back(std::sqrt(power) * rng.complex_normal());
    }
    if (cfg.motion == Motion::Dynamic) {
        ch.dopplers_hz.reserve(static_cast<std::size_t>(n_paths));
        for (long l = 0; l < n_paths; ++l)
            ch.dopplers_hz.push_back(rng.uniform(-cfg.doppler_max_hz, cfg.doppler_max_hz));
    }
    return ch;
}

namespace detail {

inline std::vector<double> crs_frequencies(const CellConfig& cell) {
    const auto positions = crs_positions(cell, 0, 0);
    std::vector<double> freqs(positions.size());
    for (std::size_t m = 0; m < positions.size(); ++m)
        freqs[m] = cell.subcarrier_frequency_hz(positions[m]);
    return freqs;
}

} // namespace detail

/**
 * @brief Synthesizes the full labeled CSI dataset for a scenario.
 *
 * Rows are ordered category-major, snapshot-minor, exactly the order the
 * categories appear in the config. Each row is |H + n| at the CRS
 * positions, with complex measurement noise sized so that
 * E|n|^2 = mean |H|^2 * 10^(-snr_db/10). The result is independent of
 * `threads` byte for byte.
 */
inline CsiDataset synth_csi_dataset(const ScenarioConfig& cfg,
                                    const CellConfig& cell = CellConfig{}, int threads = 1) {
    cfg.validate();
    cell.validate();
    const auto freqs = detail::crs_frequencies(cell);
    const std::size_t dim = freqs.size();
    const std::size_t per_cat = static_cast<std::size_t>(cfg.snapshots_per_category);
    const std::size_t rows = cfg.categories.size() * per_cat;

    CsiDataset ds;
    ds.dim = dim;
    ds.values.resize(rows * dim);
    ds.labels.resize(rows);

    const double noise_factor =
        std::isinf(cfg.snr_db) ? 0.0 : std::pow(10.0, -cfg.snr_db / 10.0);
    parallel_for(rows, threads, [&](std::size_t r) {
        const int cat = static_cast<int>(r / per_cat);
        const int snap = static_cast<int>(r % per_cat);
        const auto ch = synth_channel(cfg, cat, snap);

        double* out = ds.values.data() + r * dim;
        double mean_power = 0.0;
        std::vector<std::complex<double>> h(dim);
        for (std::size_t m = 0; m < dim; ++m) {
            h[m] = ch.h_at(freqs[m]);
            mean_power += std::norm(h[m]);
        }
        mean_power /= static_cast<double>(dim);

        if (noise_factor > 0.0) {
            auto noise = Rng::keyed(cfg.rng_seed, cfg.day_id, cat, snap, stream::kCsiNoise);
            const double sigma = std::sqrt(mean_power * noise_factor);
            for (std::size_t m = 0; m < dim; ++m) h[m] += sigma * noise.complex_normal();
        }
        for (std::size_t m = 0; m < dim; ++m) out[m] = std::abs(h[m]);
        ds.labels[r] = static_cast<std::uint8_t>(cat + 1);
    });

    nlohmann::json scenario_echo;
    to_json(scenario_echo, cfg);
    ds.provenance = {{"generator", "synth_csi_dataset"},
                     {"scenario", scenario_echo},
                     {"cell_id", cell.cell_id},
                     {"dim", dim}};
    return ds;
}

/**
 * @brief Emits one downlink subframe as a baseband capture.
 *
 * The transmit grid carries port-0 reference symbols on subframe symbols
 * 0, 4, 7 and 11, the PSS for the cell's N_ID^(2) on symbol 6 (its outer
 * subcarriers stay empty), and random QPSK payload elsewhere. The grid
 * passes through the drawn channel, is OFDM-modulated with normal prefixes,
 * padded with `lead_in` silent samples, and finally receives white noise
 * sized against the subframe's mean power (none when snr_db is infinite).
 */
inline std::pair<IqCapture, GroundTruth> synth_iq(const ScenarioConfig& cfg,
                                                  const CellConfig& cell, int category_index,
                                                  int snapshot_index, int lead_in = 2048) {
    cfg.validate();
    cell.validate();
    if (lead_in < 0) throw DomainError("lead_in must be >= 0");
    const auto ch = synth_channel(cfg, category_index, snapshot_index);

    // Channel response across the whole occupied grid.
    const int n_sc = cell.n_subcarriers();
    std::vector<std::complex<double>> h(static_cast<std::size_t>(n_sc));
    for (int k = 0; k < n_sc; ++k)
        h[static_cast<std::size_t>(k)] = ch.h_at(cell.subcarrier_frequency_hz(k));

    // Transmit grid: CRS, PSS, payload.
    ResourceGrid tx(CellConfig::kSymbolsPerSubframe, n_sc);
    std::vector<bool> is_crs(static_cast<std::size_t>(n_sc));
    for (int slot = 0; slot < 2; ++slot) {
        for (int sym : {0, 4}) {
            const auto positions = crs_positions(cell, slot, sym);
            const auto pilots = generate_crs(cell, slot, sym);
            for (std::size_t m = 0; m < positions.size(); ++m)
                tx.at(slot * CellConfig::kSymbolsPerSlot + sym, positions[m]) = pilots[m];
        }
    }
    const auto pss = generate_pss(cell.nid2());
    const auto pss_idx = pss_grid_indices(cell);
    for (std::size_t n = 0; n < pss_idx.size(); ++n)
        tx.at(kPssSubframeSymbol, pss_idx[n]) = pss[n];

    auto payload = Rng::keyed(cfg.rng_seed, cfg.day_id, category_index, snapshot_index,
                              stream::kPayload);
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    for (int l = 0; l < CellConfig::kSymbolsPerSubframe; ++l) {
        if (l == kPssSubframeSymbol) continue;  // sync symbol stays clean
        const int slot_symbol = l % CellConfig::kSymbolsPerSlot;
        std::vector<int> reserved;
        if (slot_symbol == 0 || slot_symbol == 4)
            reserved = crs_positions(cell, l / CellConfig::kSymbolsPerSlot, slot_symbol);
        std::size_t next_reserved = 0;
        for (int k = 0; k < n_sc; ++k) {
            if (next_reserved < reserved.size() && reserved[next_reserved] == k) {
                ++next_reserved;
                continue;
            }
            const std::uint64_t bits = payload.next_u64();
            tx.at(l, k) = {kInvSqrt2 * (bits & 1 ? -1.0 : 1.0),
                           kInvSqrt2 * (bits & 2 ? -1.0 : 1.0)};
        }
    }

    // Through the channel and back to time domain.
    const std::size_t subframe_len = static_cast<std::size_t>(cell.samples_per_subframe());
    std::vector<std::complex<double>> subframe(subframe_len);
    std::vector<std::complex<double>> bins(static_cast<std::size_t>(cell.fft_size));
    for (int l = 0; l < CellConfig::kSymbolsPerSubframe; ++l) {
        std::fill(bins.begin(), bins.end(), std::complex<double>{});
        for (int k = 0; k < n_sc; ++k)
            bins[static_cast<std::size_t>(cell.subcarrier_bin(k))] =
                tx.at(l, k) * h[static_cast<std::size_t>(k)];
        ifft(bins);
        const int cp = cell.cp_length(l % CellConfig::kSymbolsPerSlot);
        auto* dst = subframe.data() + cell.symbol_start(l);
        for (int i = 0; i < cp; ++i) dst[i] = bins[static_cast<std::size_t>(cell.fft_size - cp + i)];
        for (int i = 0; i < cell.fft_size; ++i) dst[cp + i] = bins[static_cast<std::size_t>(i)];
    }

    IqCapture capture;
    capture.sample_rate_hz = cell.sample_rate_hz;
    capture.center_frequency_hz = kCenterFrequencyHz;
    capture.timestamp_s = ch.time_s;
    capture.cell_id = cell.cell_id;
    capture.label = category_index + 1;
    capture.samples.assign(static_cast<std::size_t>(lead_in), std::complex<double>{});
    capture.samples.insert(capture.samples.end(), subframe.begin(), subframe.end());

    if (!std::isinf(cfg.snr_db)) {
        double mean_power = 0.0;
        for (const auto& s : subframe) mean_power += std::norm(s);
        mean_power /= static_cast<double>(subframe_len);
        const double sigma = std::sqrt(mean_power * std::pow(10.0, -cfg.snr_db / 10.0));
        auto noise = Rng::keyed(cfg.rng_seed, cfg.day_id, category_index, snapshot_index,
                                stream::kIqNoise);
        for (auto& s : capture.samples) s += sigma * noise.complex_normal();
    }

    GroundTruth truth;
    truth.category_label = category_index + 1;
    truth.persons = cfg.categories[static_cast<std::size_t>(category_index)];
    const auto freqs = detail::crs_frequencies(cell);
    truth.h_crs.resize(freqs.size());
    for (std::size_t m = 0; m < freqs.size(); ++m) truth.h_crs[m] = ch.h_at(freqs[m]);
    truth.channel = ch;
    truth.pss_frame_offset = lead_in + cell.symbol_window_start(kPssSubframeSymbol);
    return {std::move(capture), truth};
}

} // namespace commsense
