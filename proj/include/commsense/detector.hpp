#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commsense/error.hpp"

namespace commsense {

/// Which side of the threshold the empty room lives on.
enum class Orientation { EmptyBelow, EmptyAbove };

inline std::string orientation_name(Orientation o) {
    return o == Orientation::EmptyBelow ? "empty_below" : "empty_above";
}

inline Orientation orientation_from_name(const std::string& name) {
    if (name == "empty_below") return Orientation::EmptyBelow;
    if (name == "empty_above") return Orientation::EmptyAbove;
    throw DataError("unknown orientation '" + name + "'");
}

enum class Presence { Empty, Occupied };

/// Evenly spaced candidate thresholds over [start, stop].
struct ThresholdGrid {
    double start = 0.0;
    double stop = 1.0;
    double step = 0.01;

    std::vector<double> make() const {
        if (!(step > 0.0) || !(stop > start))
            throw DomainError("threshold grid needs stop > start and step > 0");
        std::vector<double> t;
        const int n = static_cast<int>(std::round((stop - start) / step));
        t.reserve(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) t.push_back(start + i * step);
        if (t.back() > stop) t.back() = stop;
        return t;
    }
};

/// Error curve of an exhaustive threshold sweep. `error_percent[i]` is the
/// percentage of misclassified samples at `thresholds[i]` under the stated
/// orientation; samples exactly on the threshold count as occupied.
struct ThresholdSweep {
    std::vector<double> thresholds;
    std::vector<double> error_percent;
    Orientation orientation = Orientation::EmptyBelow;
};

/// Operating point picked from a sweep.
struct DetectorCalibration {
    double threshold = 0.0;
    Orientation orientation = Orientation::EmptyBelow;
    double min_error_percent = 100.0;
    int day_id = 0;
};

namespace detail {

inline std::vector<int> sweep_error_counts(std::span<const double> scores,
                                           std::span<const std::uint8_t> is_empty,
                                           std::span<const double> thresholds,
                                           Orientation orientation) {
    std::vector<int> errors(thresholds.size(), 0);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        const double threshold = thresholds[t];
        int wrong = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            // Scores at or past the threshold read as occupied.
            const bool occupied_side = orientation == Orientation::EmptyBelow
                                           ? scores[i] >= threshold
                                           : scores[i] <= threshold;
            const bool empty = is_empty[i] != 0;
            if (occupied_side == empty) ++wrong;
        }
        errors[t] = wrong;
    }
    return errors;
}

} // namespace detail

/**
 * @brief Sweeps every candidate threshold over labeled scores.
 *
 * Tries both orientations and keeps the one whose best threshold makes the
 * fewest mistakes (ties favor empty-below). Misclassification counting is
 * exact integer arithmetic, so the curve does not depend on score order.
 */
inline ThresholdSweep sweep_threshold(std::span<const double> scores,
                                      std::span<const std::uint8_t> is_empty,
                                      std::span<const double> thresholds) {
    if (scores.size() != is_empty.size())
        throw DomainError("sweep_threshold: scores and labels differ in length");
    if (scores.empty()) throw DomainError("sweep_threshold: no scores");
    if (thresholds.empty()) throw DomainError("sweep_threshold: no thresholds");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (!(thresholds[i] > thresholds[i - 1]))
            throw DomainError("sweep_threshold: thresholds must strictly increase");
    for (double s : scores)
        if (!std::isfinite(s)) throw DomainError("sweep_threshold: non-finite score");
    const bool has_empty = std::find(is_empty.begin(), is_empty.end(), std::uint8_t{1}) !=
                           is_empty.end();
    const bool has_occupied = std::find(is_empty.begin(), is_empty.end(), std::uint8_t{0}) !=
                              is_empty.end();
    if (!has_empty || !has_occupied)
        throw DomainError("sweep_threshold: both classes must be present");

    const auto below = detail::sweep_error_counts(scores, is_empty, thresholds,
                                                  Orientation::EmptyBelow);
    const auto above = detail::sweep_error_counts(scores, is_empty, thresholds,
                                                  Orientation::EmptyAbove);
    const int best_below = *std::min_element(below.begin(), below.end());
    const int best_above = *std::min_element(above.begin(), above.end());

    ThresholdSweep sweep;
    sweep.orientation =
        best_above < best_below ? Orientation::EmptyAbove : Orientation::EmptyBelow;
    sweep.thresholds.assign(thresholds.begin(), thresholds.end());
    const auto& errors = sweep.orientation == Orientation::EmptyBelow ? below : above;
    sweep.error_percent.resize(errors.size());
    const double denom = static_cast<double>(scores.size());
    for (std::size_t t = 0; t < errors.size(); ++t)
        sweep.error_percent[t] = 100.0 * static_cast<double>(errors[t]) / denom;
    return sweep;
}

/// Convenience overload using the default [0, 1] grid in steps of 0.01.
inline ThresholdSweep sweep_threshold(std::span<const double> scores,
                                      std::span<const std::uint8_t> is_empty,
                                      const ThresholdGrid& grid = ThresholdGrid{}) {
    const auto thresholds = grid.make();
    return sweep_threshold(scores, is_empty, std::span<const double>(thresholds));
}

/// Picks the minimum of the sweep; ties resolve to the lowest threshold.
inline DetectorCalibration calibrate(const ThresholdSweep& sweep, int day_id = 0) {
    if (sweep.thresholds.empty() || sweep.thresholds.size() != sweep.error_percent.size())
        throw DomainError("calibrate: malformed sweep");
    std::size_t best = 0;
    for (std::size_t t = 1; t < sweep.error_percent.size(); ++t)
        if (sweep.error_percent[t] < sweep.error_percent[best]) best = t;
    DetectorCalibration cal;
    cal.threshold = sweep.thresholds[best];
    cal.orientation = sweep.orientation;
    cal.min_error_percent = sweep.error_percent[best];
    cal.day_id = day_id;
    return cal;
}

/// Applies a calibration to one normalized score.
inline Presence detect(const DetectorCalibration& cal, double score) {
    if (!std::isfinite(score)) throw DomainError("detect: non-finite score");
    const bool occupied = cal.orientation == Orientation::EmptyBelow ? score >= cal.threshold
                                                                     : score <= cal.threshold;
    return occupied ? Presence::Occupied : Presence::Empty;
}

/// Re-scores labeled data under a fixed calibration; used to confirm that a
/// calibration reproduces its sweep minimum on the data it was fitted on.
inline double detection_error_percent(const DetectorCalibration& cal,
                                      std::span<const double> scores,
                                      std::span<const std::uint8_t> is_empty) {
    if (scores.size() != is_empty.size() || scores.empty())
        throw DomainError("detection_error_percent: bad inputs");
    int wrong = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool occupied = detect(cal, scores[i]) == Presence::Occupied;
        if (occupied == (is_empty[i] != 0)) ++wrong;
    }
    return 100.0 * static_cast<double>(wrong) / static_cast<double>(scores.size());
}

/// Side-by-side calibration of two measurement days.
struct ConsistencyReport {
    DetectorCalibration day1;
    DetectorCalibration day2;
    double delta_min_error_pp = 0.0;
    double delta_threshold = 0.0;
    double bound_pp = 1.0;
    bool consistent = false;
};

/// Compares two calibrations; they agree when their minimum error rates
/// differ by at most `bound_pp` percentage points.
inline ConsistencyReport compare_days(const DetectorCalibration& day1,
                                      const DetectorCalibration& day2, double bound_pp = 1.0) {
    ConsistencyReport rep;
    rep.day1 = day1;
    rep.day2 = day2;
    rep.delta_min_error_pp = std::abs(day1.min_error_percent - day2.min_error_percent);
    rep.delta_threshold = std::abs(day1.threshold - day2.threshold);
    rep.bound_pp = bound_pp;
    rep.consistent = rep.delta_min_error_pp <= bound_pp;
    return rep;
}

inline void to_json(nlohmann::json& j, const DetectorCalibration& cal) {
    j = nlohmann::json{{"threshold", cal.threshold},
                       {"orientation", orientation_name(cal.orientation)},
                       {"min_error_percent", cal.min_error_percent},
                       {"day_id", cal.day_id}};
}

inline void from_json(const nlohmann::json& j, DetectorCalibration& cal) {
    try {
        cal.threshold = j.at("threshold").get<double>();
        cal.orientation = orientation_from_name(j.at("orientation").get<std::string>());
        cal.min_error_percent = j.at("min_error_percent").get<double>();
        cal.day_id = j.at("day_id").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad calibration document: ") + e.what());
    }
}

inline void to_json(nlohmann::json& j, const ConsistencyReport& rep) {
    j = nlohmann::json{{"day1", rep.day1},
                       {"day2", rep.day2},
                       {"delta_min_error_pp", rep.delta_min_error_pp},
                       {"delta_threshold", rep.delta_threshold},
                       {"bound_pp", rep.bound_pp},
                       {"consistent", rep.consistent}};
}

} // namespace commsense
