// Command-line front end for the passive crowd-sensing pipeline:
// simulate scenarios, extract CSI from captures, fit features, calibrate
// the occupancy detector, size crowds and run whole experiments.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commsense/commsense.hpp"

namespace {

using namespace commsense;

nlohmann::json parse_json_file(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(detail::read_file_bytes(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
}

std::vector<Split> parse_splits(const std::string& text) {
    std::vector<Split> splits;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string token = text.substr(pos, comma - pos);
        const std::size_t slash = token.find('/');
        if (slash == std::string::npos)
            throw DomainError("bad split '" + token + "', expected train/test");
        Split s;
        s.train = std::stoi(token.substr(0, slash));
        s.test = std::stoi(token.substr(slash + 1));
        splits.push_back(s);
        pos = comma + 1;
    }
    if (splits.empty()) throw DomainError("no splits given");
    return splits;
}

void emit_json(bool enabled, const nlohmann::json& doc) {
    if (enabled) std::cout << doc.dump(2) << "\n";
}

std::string fmt(double v) { return detail::fmt_g(v); }

// ---- simulate ----

struct SimulateArgs {
    std::string config;
    std::string mode;
    std::optional<int> day;
    std::optional<std::uint64_t> seed;
    std::optional<int> snapshots;
    int cell_id = 0;
    int threads = 1;
    std::string out;
    std::string iq_dir;
    int iq_count = 1;
    bool json = false;
};

int cmd_simulate(const SimulateArgs& args) {
    ScenarioConfig sc;
    if (!args.config.empty()) sc = parse_json_file(args.config).get<ScenarioConfig>();
    if (!args.mode.empty()) sc.motion = motion_from_name(args.mode);
    if (args.day) sc.day_id = *args.day;
    if (args.seed) sc.rng_seed = *args.seed;
    if (args.snapshots) sc.snapshots_per_category = *args.snapshots;
    sc.validate();

    CellConfig cell;
    cell.cell_id = args.cell_id;
    cell.validate();

    const auto ds = synth_csi_dataset(sc, cell, args.threads);
    save_dataset(ds, args.out);
    std::cerr << "wrote " << ds.rows() << " x " << ds.dim << " dataset to " << args.out << "\n";

    nlohmann::json captures = nlohmann::json::array();
    if (!args.iq_dir.empty()) {
        std::filesystem::create_directories(args.iq_dir);
        for (std::size_t cat = 0; cat < sc.categories.size(); ++cat) {
            for (int snap = 0; snap < args.iq_count; ++snap) {
                const auto [capture, truth] =
                    synth_iq(sc, cell, static_cast<int>(cat), snap);
                const std::string name = "capture_cat" + std::to_string(cat + 1) + "_snap" +
                                         std::to_string(snap) + ".iq";
                save_iq(capture, std::filesystem::path(args.iq_dir) / name);
                captures.push_back(name);
            }
        }
        std::cerr << "wrote " << captures.size() << " captures to " << args.iq_dir << "\n";
    }

    emit_json(args.json, {{"out", args.out},
                          {"rows", ds.rows()},
                          {"dim", ds.dim},
                          {"categories", sc.categories.size()},
                          {"captures", captures}});
    return 0;
}

// ---- extract ----

struct ExtractArgs {
    std::vector<std::string> iq_files;
    std::string iq_dir;
    std::string out;
    double peak_floor = 0.5;
    bool json = false;
};

int cmd_extract(const ExtractArgs& args) {
    std::vector<std::filesystem::path> files;
    for (const auto& f : args.iq_files) files.emplace_back(f);
    if (!args.iq_dir.empty()) {
        std::vector<std::filesystem::path> found;
        for (const auto& entry : std::filesystem::directory_iterator(args.iq_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".iq")
                found.push_back(entry.path());
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
    }
    if (files.empty()) throw DomainError("extract: no capture files given");

    CsiDataset ds;
    nlohmann::json syncs = nlohmann::json::array();
    nlohmann::json capture_names = nlohmann::json::array();
    for (const auto& file : files) {
        const auto capture = load_iq(file);
        if (!capture.label)
            throw DataError(file.string() +
                            ": capture has no label; labeled captures are required "
                            "to build a dataset");
        CellConfig cell;
        cell.cell_id = capture.cell_id;
        const auto sync = detect_pss(capture, cell, args.peak_floor);
        const auto grid = demodulate_ofdm(capture, sync, cell);
        auto csi = estimate_csi(grid, cell);
        ds.append(csi.values, *capture.label);
        std::cerr << file.filename().string() << ": offset " << sync.frame_offset << ", nid2 "
                  << sync.nid2 << ", peak " << fmt(sync.peak_metric) << ", cfo "
                  << fmt(sync.cfo_hz) << " Hz\n";
        capture_names.push_back(file.filename().string());
        syncs.push_back({{"file", file.filename().string()},
                         {"frame_offset", sync.frame_offset},
                         {"nid2", sync.nid2},
                         {"cfo_hz", sync.cfo_hz},
                         {"peak_metric", sync.peak_metric}});
    }
    ds.provenance = {{"generator", "extract"}, {"captures", capture_names}};
    save_dataset(ds, args.out);
    std::cerr << "wrote " << ds.rows() << " x " << ds.dim << " dataset to " << args.out << "\n";
    emit_json(args.json,
              {{"out", args.out}, {"rows", ds.rows()}, {"dim", ds.dim}, {"captures", syncs}});
    return 0;
}

// ---- fit ----

struct FitArgs {
    std::string data;
    std::size_t k = 3;
    std::string out;
    bool json = false;
};

int cmd_fit(const FitArgs& args) {
    const auto ds = load_dataset(args.data);
    PcaModel model = fit_pca(ds, args.k);
    std::vector<double> pc1(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) pc1[r] = project(model, ds.row(r)).scores[0];
    model.pc1_range = fit_score_range(pc1);
    model.provenance = {{"generator", "fit"}, {"source", args.data}, {"rows", ds.rows()}};
    save_model(model, args.out);
    std::cerr << "fitted " << args.k << "-component model on " << ds.rows() << " rows, wrote "
              << args.out << "\n";
    emit_json(args.json,
              {{"out", args.out}, {"k", args.k}, {"eigenvalues", model.eigenvalues}});
    return 0;
}

// ---- detect ----

struct DetectArgs {
    std::string model;
    std::optional<double> score;
    std::string data;
    std::string sweep_out;
    std::optional<int> day;
    bool json = false;
};

int cmd_detect(const DetectArgs& args) {
    PcaModel model = load_model(args.model);

    if (args.score) {
        if (args.model.empty() || model.calibration.is_null())
            throw DataError(args.model + ": model carries no calibration; sweep a labeled "
                                         "dataset first (detect --data)");
        const auto cal = model.calibration.get<DetectorCalibration>();
        const auto presence = detect(cal, *args.score);
        const std::string verdict = presence == Presence::Occupied ? "occupied" : "empty";
        std::cerr << "score " << fmt(*args.score) << " -> " << verdict << " (threshold "
                  << fmt(cal.threshold) << ", " << orientation_name(cal.orientation) << ")\n";
        emit_json(args.json, {{"score", *args.score}, {"presence", verdict}});
        return 0;
    }

    const auto ds = load_dataset(args.data);
    if (!model.pc1_range)
        throw DataError(args.model + ": model has no pc1_range; refit it before sweeping");
    std::vector<double> scores(ds.rows());
    std::vector<std::uint8_t> is_empty(ds.rows());
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        scores[r] = model.pc1_range->normalize(project(model, ds.row(r)).scores[0]);
        is_empty[r] = ds.label(r) == 1 ? 1 : 0;
    }

    int day = args.day.value_or(0);
    if (!args.day && ds.provenance.contains("scenario") &&
        ds.provenance["scenario"].contains("day_id"))
        day = ds.provenance["scenario"]["day_id"].get<int>();

    const auto sweep = sweep_threshold(scores, is_empty);
    const auto cal = calibrate(sweep, day);
    model.calibration = cal;
    save_model(model, args.model);

    if (!args.sweep_out.empty()) {
        std::string csv = "threshold,error_percent\n";
        for (std::size_t t = 0; t < sweep.thresholds.size(); ++t)
            csv += fmt(sweep.thresholds[t]) + "," + fmt(sweep.error_percent[t]) + "\n";
        detail::write_file_bytes(args.sweep_out, csv);
    }

    std::cerr << "calibrated: threshold " << fmt(cal.threshold) << " ("
              << orientation_name(cal.orientation) << "), min error "
              << fmt(cal.min_error_percent) << "% on day " << day << "; updated " << args.model
              << "\n";
    nlohmann::json doc = cal;
    if (!args.sweep_out.empty()) doc["sweep_out"] = args.sweep_out;
    emit_json(args.json, doc);
    return 0;
}

// ---- estimate ----

struct EstimateArgs {
    std::string data;
    std::string splits = "200/250,300/350,400/500,500/700,600/800,750/1000";
    std::size_t k = 3;
    int threads = 1;
    std::string out_dir;
    bool json = false;
};

int cmd_estimate(const EstimateArgs& args) {
    const auto ds = load_dataset(args.data);
    const auto splits = parse_splits(args.splits);
    const auto rows = accuracy_grid(ds, splits, args.k, args.threads);

    std::string mode = "data";
    if (ds.provenance.contains("scenario") && ds.provenance["scenario"].contains("motion"))
        mode = ds.provenance["scenario"]["motion"].get<std::string>();

    std::filesystem::create_directories(args.out_dir);
    nlohmann::json split_docs = nlohmann::json::array();
    std::string grid_csv = "train,test," + mode + "_accuracy_percent\n";
    for (const auto& row : rows) {
        const std::string confusion_name = "confusion_" + mode + "_" +
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
        detail::write_file_bytes(std::filesystem::path(args.out_dir) / confusion_name, csv);
        grid_csv += std::to_string(row.split.train) + "," + std::to_string(row.split.test) +
                    "," + fmt(100.0 * row.accuracy) + "\n";
        std::cerr << row.split.train << "/" << row.split.test << ": accuracy "
                  << fmt(100.0 * row.accuracy) << "% (" << row.confusion.trace() << "/"
                  << row.confusion.total() << ")\n";
        split_docs.push_back({{"train", row.split.train},
                              {"test", row.split.test},
                              {"accuracy_percent", 100.0 * row.accuracy},
                              {"correct", row.confusion.trace()},
                              {"total", row.confusion.total()},
                              {"confusion_csv", confusion_name}});
    }
    detail::write_file_bytes(std::filesystem::path(args.out_dir) / "accuracy_grid.csv", grid_csv);
    emit_json(args.json, {{"out_dir", args.out_dir}, {"splits", split_docs}});
    return 0;
}

// ---- run / compare-days ----

struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool no_plots = false;
    std::string days;  // compare-days only
    bool json = false;
};

ExperimentConfig load_experiment_config(const RunArgs& args) {
    ExperimentConfig cfg = args.config.empty()
                               ? default_experiment_config()
                               : parse_json_file(args.config).get<ExperimentConfig>();
    if (!args.out.empty()) cfg.output_dir = args.out;
    if (args.seed) {
        if (!cfg.scenario) throw DomainError("--seed needs a scenario-backed config");
        cfg.scenario->rng_seed = *args.seed;
    }
    if (args.threads) cfg.threads = *args.threads;
    if (args.no_plots) cfg.emit_plots = false;
    return cfg;
}

void print_run_summary(const ExperimentReport& report) {
    for (const auto& [mode, days] : report.calibrations)
        for (const auto& [day, cal] : days)
            std::cerr << mode << " day " << day << ": min error " << fmt(cal.min_error_percent)
                      << "% at threshold " << fmt(cal.threshold) << " ("
                      << orientation_name(cal.orientation) << ")\n";
    for (const auto& [mode, rep] : report.consistency)
        std::cerr << mode << " day " << rep.day1.day_id << " vs day " << rep.day2.day_id
                  << ": min error delta " << fmt(rep.delta_min_error_pp) << " pp, "
                  << (rep.consistent ? "consistent" : "NOT consistent") << "\n";
    for (const auto& [mode, rows] : report.grid)
        for (const auto& row : rows)
            std::cerr << mode << " " << row.split.train << "/" << row.split.test
                      << ": accuracy " << fmt(100.0 * row.accuracy) << "% ("
                      << row.confusion.trace() << "/" << row.confusion.total() << ")\n";
    std::cerr << "report: " << report.report_path.string() << "\n";
}

int cmd_run(const RunArgs& args) {
    const auto cfg = load_experiment_config(args);
    const auto report = run_experiment(cfg);
    print_run_summary(report);
    emit_json(args.json, report.document);
    return 0;
}

int cmd_compare_days(const RunArgs& args) {
    ExperimentConfig cfg = load_experiment_config(args);
    if (!cfg.scenario) throw DomainError("compare-days needs a scenario-backed config");
    if (!args.days.empty()) {
        cfg.day_ids.clear();
        std::size_t pos = 0;
        while (pos < args.days.size()) {
            std::size_t comma = args.days.find(',', pos);
            if (comma == std::string::npos) comma = args.days.size();
            cfg.day_ids.push_back(std::stoi(args.days.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (cfg.day_ids.size() != 2)
        throw DomainError("compare-days needs exactly two day ids (--days A,B)");

    const auto report = run_experiment(cfg);
    print_run_summary(report);
    emit_json(args.json, report.document);
    for (const auto& [mode, rep] : report.consistency)
        if (!rep.consistent)
            throw PipelineError("consistency", mode + " calibration drifted by " +
                                                   fmt(rep.delta_min_error_pp) +
                                                   " pp between days");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"passive LTE crowd sensing: simulate, extract, detect, estimate"};
    app.require_subcommand(1);
    app.set_version_flag("--version", commsense::kToolVersion);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "synthesize a labeled CSI dataset");
    sim_cmd->add_option("--config", sim.config, "scenario config JSON");
    sim_cmd->add_option("--mode", sim.mode, "motion mode override (static|dynamic)");
    sim_cmd->add_option("--day", sim.day, "day id override");
    sim_cmd->add_option("--seed", sim.seed, "rng seed override");
    sim_cmd->add_option("--snapshots", sim.snapshots, "snapshots per category override");
    sim_cmd->add_option("--cell-id", sim.cell_id, "physical cell id");
    sim_cmd->add_option("--threads", sim.threads, "worker threads");
    sim_cmd->add_option("--out", sim.out, "output dataset (.csid)")->required();
    sim_cmd->add_option("--iq-dir", sim.iq_dir, "also emit IQ captures here");
    sim_cmd->add_option("--iq-count", sim.iq_count, "captures per category for --iq-dir");
    sim_cmd->add_flag("--json", sim.json, "machine-readable summary on stdout");
    sim_cmd->callback([&] { (void)cmd_simulate(sim); });

    ExtractArgs ext;
    auto* ext_cmd = app.add_subcommand("extract", "estimate CSI from IQ captures");
    ext_cmd->add_option("--iq", ext.iq_files, "capture file(s)");
    ext_cmd->add_option("--iq-dir", ext.iq_dir, "directory of .iq captures");
    ext_cmd->add_option("--out", ext.out, "output dataset (.csid)")->required();
    ext_cmd->add_option("--peak-floor", ext.peak_floor, "sync peak floor (default 0.5)");
    ext_cmd->add_flag("--json", ext.json, "machine-readable summary on stdout");
    ext_cmd->callback([&] { (void)cmd_extract(ext); });

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit the PCA feature model");
    fit_cmd->add_option("--data", fit.data, "input dataset (.csid)")->required();
    fit_cmd->add_option("--k", fit.k, "number of components (default 3)");
    fit_cmd->add_option("--out", fit.out, "output model JSON")->required();
    fit_cmd->add_flag("--json", fit.json, "machine-readable summary on stdout");
    fit_cmd->callback([&] { (void)cmd_fit(fit); });

    DetectArgs det;
    auto* det_cmd = app.add_subcommand("detect", "calibrate or apply the occupancy detector");
    det_cmd->add_option("--model", det.model, "model JSON")->required();
    det_cmd->add_option("--score", det.score, "classify one normalized PC1 score");
    det_cmd->add_option("--data", det.data, "labeled dataset to sweep");
    det_cmd->add_option("--sweep-out", det.sweep_out, "write the sweep curve CSV here");
    det_cmd->add_option("--day", det.day, "day id recorded in the calibration");
    det_cmd->add_flag("--json", det.json, "machine-readable summary on stdout");
    det_cmd->callback([&] {
        if (det.score.has_value() == !det.data.empty())
            throw CLI::ValidationError("detect", "pass exactly one of --score / --data");
        (void)cmd_detect(det);
    });

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "train/test the crowd-size classifier");
    est_cmd->add_option("--data", est.data, "input dataset (.csid)")->required();
    est_cmd->add_option("--splits", est.splits, "train/test ladder, e.g. 500/700,750/1000");
    est_cmd->add_option("--k", est.k, "PCA components (default 3)");
    est_cmd->add_option("--threads", est.threads, "worker threads");
    est_cmd->add_option("--out-dir", est.out_dir, "output directory")->required();
    est_cmd->add_flag("--json", est.json, "machine-readable summary on stdout");
    est_cmd->callback([&] { (void)cmd_estimate(est); });

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run the full experiment pipeline");
    run_cmd->add_option("--config", run.config, "experiment config JSON");
    run_cmd->add_option("--out", run.out, "output directory override");
    run_cmd->add_option("--seed", run.seed, "scenario seed override");
    run_cmd->add_option("--threads", run.threads, "worker threads override");
    run_cmd->add_flag("--no-plots", run.no_plots, "skip SVG plots");
    run_cmd->add_flag("--json", run.json, "print report.json on stdout");
    run_cmd->callback([&] { (void)cmd_run(run); });

    RunArgs cmp;
    auto* cmp_cmd = app.add_subcommand("compare-days",
                                       "check detector consistency across two days");
    cmp_cmd->add_option("--config", cmp.config, "experiment config JSON");
    cmp_cmd->add_option("--days", cmp.days, "two day ids, e.g. 1,2")->required();
    cmp_cmd->add_option("--out", cmp.out, "output directory override");
    cmp_cmd->add_option("--seed", cmp.seed, "scenario seed override");
    cmp_cmd->add_option("--threads", cmp.threads, "worker threads override");
    cmp_cmd->add_flag("--json", cmp.json, "print report.json on stdout");
    cmp_cmd->callback([&] { (void)cmd_compare_days(cmp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const commsense::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const commsense::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const commsense::PipelineError& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
