#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "commsense/cell.hpp"
#include "commsense/dataset.hpp"
#include "commsense/detector.hpp"
#include "commsense/error.hpp"
#include "commsense/knn.hpp"
#include "commsense/pca.hpp"
#include "commsense/scenario.hpp"
#include "commsense/svg.hpp"

namespace commsense {

inline constexpr const char* kToolName = "commsense";
inline constexpr const char* kToolVersion = "1.0.0";

/**
 * @brief Full pipeline description: data source, feature, detector and
 * estimator settings, output location.
 *
 * Exactly one data source must be set. With a scenario the harness expands
 * it over `modes` and `day_ids` (each combination redraws the data with the
 * scenario's seed, the mode and that day); with a dataset path it runs the
 * file as a single item. Two day_ids enable the cross-day consistency
 * stage.
 */
struct ExperimentConfig {
    std::optional<ScenarioConfig> scenario;
    std::optional<std::string> dataset_path;
    CellConfig cell;
    std::vector<Motion> modes = {Motion::Static, Motion::Dynamic};
    std::vector<int> day_ids;  // empty: the scenario's own day_id
    std::size_t pca_k = 3;
    ThresholdGrid threshold_grid;
    std::vector<Split> splits = {{200, 250}, {300, 350}, {400, 500},
                                 {500, 700}, {600, 800}, {750, 1000}};
    std::string output_dir = "out";
    bool emit_plots = true;
    int threads = 1;

    void validate() const {
        if (scenario.has_value() == dataset_path.has_value())
            throw DomainError("experiment config needs exactly one of scenario / dataset");
        if (scenario) scenario->validate();
        cell.validate();
        if (modes.empty()) throw DomainError("modes must not be empty");
        if (modes.size() > 2 || (modes.size() == 2 && modes[0] == modes[1]))
            throw DomainError("modes must be distinct");
        if (day_ids.size() > 2) throw DomainError("at most two day_ids are supported");
        for (int d : day_ids)
            if (d < 0) throw DomainError("day_ids must be >= 0");
        if (day_ids.size() == 2 && day_ids[0] == day_ids[1])
            throw DomainError("the two day_ids must differ");
        if (pca_k < 1) throw DomainError("pca_k must be >= 1");
        for (const auto& s : splits)
            if (s.train < 1 || s.test < 1) throw DomainError("split sizes must be positive");
        if (output_dir.empty()) throw DomainError("output_dir must not be empty");
        if (threads < 1) throw DomainError("threads must be >= 1");
    }
};

/// The stock configuration used when no config file is given: the default
/// scenario in both motion modes, with enough snapshots per category (1750)
/// to keep even the 750/1000 train/test split disjoint.
inline ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.scenario = ScenarioConfig{};
    cfg.scenario->snapshots_per_category = 1750;
    return cfg;
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
    j = nlohmann::json::object();
    if (cfg.scenario) j["scenario"] = *cfg.scenario;
    if (cfg.dataset_path) j["dataset"] = *cfg.dataset_path;
    j["cell_id"] = cfg.cell.cell_id;
    auto modes = nlohmann::json::array();
    for (Motion m : cfg.modes) modes.push_back(motion_name(m));
    j["modes"] = modes;
    j["day_ids"] = cfg.day_ids;
    j["pca_k"] = cfg.pca_k;
    j["threshold_grid"] = {{"start", cfg.threshold_grid.start},
                           {"stop", cfg.threshold_grid.stop},
                           {"step", cfg.threshold_grid.step}};
    auto splits = nlohmann::json::array();
    for (const auto& s : cfg.splits) splits.push_back({s.train, s.test});
    j["splits"] = splits;
    j["output_dir"] = cfg.output_dir;
    j["emit_plots"] = cfg.emit_plots;
    // `threads` is accepted on input but never echoed: artifacts must not
    // depend on how the work was scheduled.
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    cfg = ExperimentConfig{};
    bool modes_given = false;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "scenario")
                cfg.scenario = value.get<ScenarioConfig>();
            else if (key == "dataset")
                cfg.dataset_path = value.get<std::string>();
            else if (key == "cell_id")
                cfg.cell.cell_id = value.get<int>();
            else if (key == "modes") {
                cfg.modes.clear();
                for (const auto& m : value) cfg.modes.push_back(motion_from_name(m.get<std::string>()));
                modes_given = true;
            } else if (key == "day_ids")
                cfg.day_ids = value.get<std::vector<int>>();
            else if (key == "pca_k")
                cfg.pca_k = value.get<std::size_t>();
            else if (key == "threshold_grid") {
                for (const auto& [gk, gv] : value.items()) {
                    if (gk == "start")
                        cfg.threshold_grid.start = gv.get<double>();
                    else if (gk == "stop")
                        cfg.threshold_grid.stop = gv.get<double>();
                    else if (gk == "step")
                        cfg.threshold_grid.step = gv.get<double>();
                    else
                        throw DataError("unknown threshold_grid key '" + gk + "'");
                }
            } else if (key == "splits") {
                cfg.splits.clear();
                for (const auto& s : value) {
                    if (!s.is_array() || s.size() != 2)
                        throw DataError("splits entries must be [train, test] pairs");
                    cfg.splits.push_back({s[0].get<int>(), s[1].get<int>()});
                }
            } else if (key == "output_dir")
                cfg.output_dir = value.get<std::string>();
            else if (key == "emit_plots")
                cfg.emit_plots = value.get<bool>();
            else if (key == "threads")
                cfg.threads = value.get<int>();
            else
                throw DataError("unknown experiment key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad experiment config: ") + e.what());
    }
    // A dataset file is one concrete measurement; mode expansion only
    // applies to simulated scenarios.
    if (cfg.dataset_path && !modes_given) cfg.modes = {Motion::Static};
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw DataError(std::string("bad experiment config: ") + e.what());
    }
}

/// Results of one harness run. `document` mirrors report.json; the typed
/// members exist so tests and callers need not re-parse it.
struct ExperimentReport {
    nlohmann::json document;
    std::filesystem::path directory;
    std::filesystem::path report_path;
    std::vector<std::string> artifacts;  // file names inside `directory`
    std::map<std::string, std::map<int, DetectorCalibration>> calibrations;  // mode -> day
    std::map<std::string, ConsistencyReport> consistency;                    // mode
    std::map<std::string, std::vector<GridRow>> grid;                        // mode
};

namespace detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string day_tag(const std::string& mode, int day) {
    return mode + "_day" + std::to_string(day);
}

/// Splits one CSV text into rows of doubles, skipping the header line.
inline std::vector<std::vector<double>> parse_csv_numbers(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::size_t pos = text.find('\n');  // drop the header
    if (pos == std::string::npos) return rows;
    ++pos;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::vector<double> row;
        std::size_t field = pos;
        while (field < eol) {
            std::size_t comma = text.find(',', field);
            if (comma == std::string::npos || comma > eol) comma = eol;
            row.push_back(std::strtod(text.substr(field, comma - field).c_str(), nullptr));
            field = comma + 1;
        }
        if (!row.empty()) rows.push_back(std::move(row));
        pos = eol + 1;
    }
    return rows;
}

} // namespace detail

/**
 * @brief Renders the report's plot set from its CSV artifacts.
 *
 * Reads the scores and sweep CSVs referenced by the report document (not
 * the in-memory data), so the plots show exactly what was persisted:
 * a normalized-PC1 histogram per item, pairwise feature scatters per mode,
 * and all sweep curves in one chart. Returns the file names written, in
 * emission order. Rendering is deterministic: calling twice rewrites
 * identical bytes.
 */
inline std::vector<std::string> emit_plots(const ExperimentReport& report) {
    std::vector<std::string> plots;
    const auto& detector = report.document.at("detector");

    std::vector<PlotSeries> sweep_curves;
    for (auto mode_it = detector.begin(); mode_it != detector.end(); ++mode_it) {
        const std::string mode = mode_it.key();
        bool scatter_done = false;
        for (auto day_it = mode_it.value().begin(); day_it != mode_it.value().end(); ++day_it) {
            const std::string tag = detail::day_tag(mode, std::stoi(day_it.key()));
            const auto scores_csv = report.directory /
                                    day_it.value().at("scores_csv").get<std::string>();
            const auto rows = detail::parse_csv_numbers(detail::read_file_bytes(scores_csv));

            // Columns: row, label, pc1..pck, pc1_normalized.
            std::map<int, std::vector<std::size_t>> by_label;
            for (std::size_t r = 0; r < rows.size(); ++r)
                by_label[static_cast<int>(rows[r][1])].push_back(r);

            std::vector<PlotSeries> hist;
            std::size_t color = 0;
            for (const auto& [label, members] : by_label) {
                PlotSeries s;
                s.name = "category " + std::to_string(label);
                s.color = plot_palette()[color++ % plot_palette().size()];
                for (std::size_t r : members) s.xs.push_back(rows[r].back());
                hist.push_back(std::move(s));
            }
            const std::string hist_name = "pc1_hist_" + tag + ".svg";
            write_histogram_svg(report.directory / hist_name,
                                "normalized PC1 by category (" + tag + ")", hist,
                                "normalized PC1 score");
            plots.push_back(hist_name);

            const std::size_t k = rows.empty() ? 0 : rows.front().size() - 3;
            if (!scatter_done && k >= 2) {
                std::vector<std::pair<std::size_t, std::size_t>> combos = {{0, 1}};
                if (k >= 3) combos = {{0, 1}, {0, 2}, {1, 2}};
                std::vector<ScatterPanel> panels;
                for (auto [a, b] : combos) {
                    ScatterPanel panel;
                    panel.x_label = "PC" + std::to_string(a + 1);
                    panel.y_label = "PC" + std::to_string(b + 1);
                    std::size_t c = 0;
                    for (const auto& [label, members] : by_label) {
                        PlotSeries s;
                        s.name = "category " + std::to_string(label);
                        s.color = plot_palette()[c++ % plot_palette().size()];
                        for (std::size_t r : members) {
                            s.xs.push_back(rows[r][2 + a]);
                            s.ys.push_back(rows[r][2 + b]);
                        }
                        panel.series.push_back(std::move(s));
                    }
                    panels.push_back(std::move(panel));
                }
                const std::string scatter_name = "scatter_" + tag + ".svg";
                write_scatter_svg(report.directory / scatter_name,
                                  "feature scatter (" + tag + ")", panels);
                plots.push_back(scatter_name);
                scatter_done = true;
            }

            const auto sweep_csv = report.directory /
                                   day_it.value().at("sweep_csv").get<std::string>();
            const auto sweep_rows = detail::parse_csv_numbers(detail::read_file_bytes(sweep_csv));
            PlotSeries curve;
            curve.name = tag;
            curve.color = plot_palette()[sweep_curves.size() % plot_palette().size()];
            for (const auto& r : sweep_rows) {
                curve.xs.push_back(r[0]);
                curve.ys.push_back(r[1]);
            }
            sweep_curves.push_back(std::move(curve));
        }
    }
    write_curves_svg(report.directory / "sweep_curves.svg", "detection error vs threshold",
                     sweep_curves, "threshold", "error (%)");
    plots.push_back("sweep_curves.svg");
    return plots;
}

namespace detail {

struct RunItem {
    std::string mode;  // "static" / "dynamic", or taken from file provenance
    int day = 0;
    CsiDataset ds;
};

} // namespace detail

/**
 * @brief Runs the whole pipeline and persists every artifact.
 *
 * Stages: data (simulate or ingest), features (PCA fit + projection per
 * item), detector (sweep + calibration per item), consistency (when two
 * day_ids are given), estimator (accuracy grid per mode on the first day),
 * plots, report. A failing stage removes all files created so far and
 * rethrows as PipelineError naming the stage; data-format problems keep
 * their DataError type. Everything written is a pure function of the
 * config, independent of `threads`.
 */
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    ExperimentReport report;
    report.directory = cfg.output_dir;
    std::filesystem::create_directories(report.directory);
    std::vector<std::filesystem::path> created;
    auto persist = [&](const std::string& name, const std::string& bytes) {
        const auto path = report.directory / name;
        detail::write_file_bytes(path, bytes);
        created.push_back(path);
        report.artifacts.push_back(name);
    };

    std::string stage = "data";
    try {
        // ---- data ----
        std::vector<detail::RunItem> items;
        if (cfg.scenario) {
            std::vector<int> days = cfg.day_ids;
            if (days.empty()) days = {cfg.scenario->day_id};
            for (Motion mode : cfg.modes) {
                for (int day : days) {
                    ScenarioConfig sc = *cfg.scenario;
                    sc.motion = mode;
                    sc.day_id = day;
                    detail::RunItem item;
                    item.mode = motion_name(mode);
                    item.day = day;
                    item.ds = synth_csi_dataset(sc, cfg.cell, cfg.threads);
                    const std::string name = "csi_" + detail::day_tag(item.mode, day) + ".csid";
                    save_dataset(item.ds, report.directory / name);
                    created.push_back(report.directory / name);
                    report.artifacts.push_back(name);
                    if (!item.ds.provenance.is_null()) {
                        created.push_back(detail::sidecar_path(report.directory / name));
                        report.artifacts.push_back(name + ".meta.json");
                    }
                    items.push_back(std::move(item));
                }
            }
        } else {
            detail::RunItem item;
            item.ds = load_dataset(*cfg.dataset_path);
            item.mode = "data";
            if (item.ds.provenance.contains("scenario")) {
                const auto& sc = item.ds.provenance.at("scenario");
                if (sc.contains("motion")) item.mode = sc.at("motion").get<std::string>();
                if (sc.contains("day_id")) item.day = sc.at("day_id").get<int>();
            }
            items.push_back(std::move(item));
        }

        // ---- features + detector ----
        stage = "features";
        nlohmann::json detector_doc = nlohmann::json::object();
        bool occupied_present = false;
        for (auto& item : items) {
            const std::string tag = detail::day_tag(item.mode, item.day);

            stage = "features";
            PcaModel model = fit_pca(item.ds, cfg.pca_k);
            auto features = project_all(model, item.ds);
            std::vector<double> pc1(features.size());
            for (std::size_t i = 0; i < features.size(); ++i) pc1[i] = features[i].scores[0];
            model.pc1_range = fit_score_range(pc1);
            const std::string source = cfg.scenario ? std::string("scenario") : *cfg.dataset_path;
            model.provenance = {{"source", source},
                                {"mode", item.mode},
                                {"day_id", item.day},
                                {"rows", item.ds.rows()}};

            std::string scores_csv = "row,label";
            for (std::size_t c = 1; c <= cfg.pca_k; ++c) scores_csv += ",pc" + std::to_string(c);
            scores_csv += ",pc1_normalized\n";
            std::vector<double> normalized(features.size());
            std::vector<std::uint8_t> is_empty(features.size());
            for (std::size_t i = 0; i < features.size(); ++i) {
                normalized[i] = model.pc1_range->normalize(features[i].scores[0]);
                is_empty[i] = *features[i].label == 1 ? 1 : 0;
                if (*features[i].label != 1) occupied_present = true;
                scores_csv += std::to_string(i) + "," + std::to_string(*features[i].label);
                for (double s : features[i].scores) scores_csv += "," + detail::fmt_g(s);
                scores_csv += "," + detail::fmt_g(normalized[i]) + "\n";
            }
            persist("scores_" + tag + ".csv", scores_csv);

            stage = "detector";
            const auto sweep = sweep_threshold(normalized, is_empty, cfg.threshold_grid);
            const auto cal = calibrate(sweep, item.day);
            report.calibrations[item.mode][item.day] = cal;

            std::string sweep_csv = "threshold,error_percent\n";
            for (std::size_t t = 0; t < sweep.thresholds.size(); ++t)
                sweep_csv += detail::fmt_g(sweep.thresholds[t]) + "," +
                             detail::fmt_g(sweep.error_percent[t]) + "\n";
            persist("sweep_" + tag + ".csv", sweep_csv);

            model.calibration = cal;
            nlohmann::json model_json = model;
            persist("model_" + tag + ".json", model_json.dump(2) + "\n");

            nlohmann::json entry{
                {"model", "model_" + tag + ".json"},
                {"scores_csv", "scores_" + tag + ".csv"},
                {"sweep_csv", "sweep_" + tag + ".csv"},
                {"calibration", cal},
                {"orientation", orientation_name(sweep.orientation)},
            };
            if (cfg.scenario) entry["dataset"] = "csi_" + tag + ".csid";
            detector_doc[item.mode][std::to_string(item.day)] = std::move(entry);
        }
        report.document["detector"] = std::move(detector_doc);

        // ---- consistency ----
        if (cfg.day_ids.size() == 2) {
            stage = "consistency";
            nlohmann::json consistency_doc = nlohmann::json::object();
            for (const auto& [mode, cals] : report.calibrations) {
                const auto rep =
                    compare_days(cals.at(cfg.day_ids[0]), cals.at(cfg.day_ids[1]));
                report.consistency[mode] = rep;
                consistency_doc[mode] = rep;
            }
            report.document["consistency"] = std::move(consistency_doc);
        }

        // ---- estimator ----
        if (!cfg.splits.empty() && occupied_present) {
            stage = "estimator";
            nlohmann::json estimator_doc = nlohmann::json::object();
            for (const auto& item : items) {
                if (cfg.day_ids.size() >= 1 && item.day != cfg.day_ids[0] && cfg.scenario)
                    continue;  // the grid runs on the first day only
                if (cfg.scenario && cfg.day_ids.empty() && item.day != cfg.scenario->day_id)
                    continue;
                const auto rows = accuracy_grid(item.ds, cfg.splits, cfg.pca_k, cfg.threads);
                nlohmann::json split_docs = nlohmann::json::array();
                for (const auto& row : rows) {
                    const std::string confusion_name = "confusion_" + item.mode + "_" +
                                                       std::to_string(row.split.train) + "_" +
                                                       std::to_string(row.split.test) + ".csv";
                    std::string csv;
                    for (int r = 1; r <= row.confusion.n; ++r) {
                        for (int c = 1; c <= row.confusion.n; ++c) {
                            if (c > 1) csv += ",";
                            csv += std::to_string(row.confusion.at(r, c));
                        }
                        csv += "\n";
                    }
                    persist(confusion_name, csv);
                    split_docs.push_back({{"train", row.split.train},
                                          {"test", row.split.test},
                                          {"accuracy_percent", 100.0 * row.accuracy},
                                          {"correct", row.confusion.trace()},
                                          {"total", row.confusion.total()},
                                          {"confusion_csv", confusion_name}});
                }
                estimator_doc[item.mode] = std::move(split_docs);
                report.grid[item.mode] = rows;
            }

            // One grid CSV laid out split-per-row, mode-per-column.
            std::string grid_csv = "train,test";
            std::vector<std::string> grid_modes;
            for (const auto& [mode, rows] : report.grid) grid_modes.push_back(mode);
            for (const auto& mode : grid_modes) grid_csv += "," + mode + "_accuracy_percent";
            grid_csv += "\n";
            for (std::size_t s = 0; s < cfg.splits.size(); ++s) {
                grid_csv += std::to_string(cfg.splits[s].train) + "," +
                            std::to_string(cfg.splits[s].test);
                for (const auto& mode : grid_modes)
                    grid_csv += "," + detail::fmt_g(100.0 * report.grid[mode][s].accuracy);
                grid_csv += "\n";
            }
            persist("accuracy_grid.csv", grid_csv);
            estimator_doc["grid_csv"] = "accuracy_grid.csv";
            report.document["estimator"] = std::move(estimator_doc);
        }

        // ---- plots ----
        if (cfg.emit_plots) {
            stage = "plots";
            const auto plot_names = emit_plots(report);
            for (const auto& name : plot_names) {
                created.push_back(report.directory / name);
                report.artifacts.push_back(name);
            }
            report.document["plots"] = plot_names;
        }

        // ---- report ----
        stage = "report";
        nlohmann::json config_echo;
        to_json(config_echo, cfg);
        report.document["config"] = std::move(config_echo);
        report.document["artifacts"] = report.artifacts;
        // Wall-clock values stay out of the report so reruns are
        // byte-identical; timing belongs to the logs.
        report.document["runtime"] = {{"tool", kToolName},
                                      {"version", kToolVersion},
                                      {"stages", nlohmann::json::array(
                                                     {"data", "features", "detector",
                                                      "consistency", "estimator", "plots",
                                                      "report"})}};
        report.report_path = report.directory / "report.json";
        created.push_back(report.report_path);
        detail::write_file_bytes(report.report_path, report.document.dump(2) + "\n");
        report.artifacts.push_back("report.json");
    } catch (...) {
        for (const auto& path : created) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
        try {
            throw;
        } catch (const DataError&) {
            throw;  // malformed input keeps its type (and exit code)
        } catch (const PipelineError&) {
            throw;
        } catch (const std::exception& e) {
            throw PipelineError(stage, e.what());
        }
    }
    return report;
}

} // namespace commsense
