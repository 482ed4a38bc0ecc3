#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aqibench/aqi.hpp"
#include "aqibench/benchmark.hpp"
#include "aqibench/config.hpp"
#include "aqibench/csv.hpp"
#include "aqibench/ingest.hpp"
#include "aqibench/lag.hpp"
#include "aqibench/models/train.hpp"
#include "aqibench/report.hpp"

namespace aqibench {

inline std::string pollutant_slug(Pollutant p) {
    return p == Pollutant::Pm25 ? "pm25" : "o3";
}

inline std::string family_slug(ModelFamily f) {
    switch (f) {
        case ModelFamily::Lr: return "lr";
        case ModelFamily::Sarimax: return "sarimax";
        case ModelFamily::Mlp: return "mlp";
        case ModelFamily::MlpPhys: return "mlp_phys";
        case ModelFamily::Lstm: return "lstm";
        case ModelFamily::LstmPhys: return "lstm_phys";
    }
    return "lr";
}

inline std::string cell_slug(const GridCell& cell) {
    std::string slug = pollutant_slug(cell.pollutant) + "_lag" + std::to_string(cell.lag) + "_" +
                       family_slug(cell.family);
    if (is_physics_family(cell.family)) {
        slug += "_ld" + csv::format_double(cell.weights.lambda_data) + "_lp" +
                csv::format_double(cell.weights.lambda_phys);
    }
    return slug;
}

inline std::string series_path(const RunConfig& cfg, Pollutant p) {
    return cfg.output_dir + "/series/" + pollutant_slug(p) + ".csv";
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace detail

/// Parses every configured yearly export, averages stations per day, merges
/// years, and writes the canonical series file plus a summary sidecar.
inline int cmd_ingest(const RunConfig& cfg) {
    validate_config_paths(cfg, /*need_raw_files=*/true, /*need_breakpoints=*/false);
    std::filesystem::create_directories(cfg.output_dir + "/series");
    for (const auto& pc : cfg.pollutants) {
        std::vector<DailySeries> yearly;
        IngestStats total;
        for (const auto& file : pc.files) {
            IngestStats stats;
            const auto observations =
                parse_epa_daily_csv_file(file, pc.columns, pc.date_format, &stats);
            yearly.push_back(aggregate_daily_mean(observations, pc.pollutant));
            total.rows_total += stats.rows_total;
            total.rows_kept += stats.rows_kept;
            total.rows_dropped += stats.rows_dropped;
        }
        const DailySeries merged = merge_years(yearly);
        write_series_csv_file(merged, series_path(cfg, pc.pollutant));

        const SummaryStats s = series_summary(merged);
        nlohmann::json summary = {
            {"pollutant", std::string(pollutant_name(pc.pollutant))},
            {"days", s.n},
            {"first_date", s.first_date.to_iso()},
            {"last_date", s.last_date.to_iso()},
            {"aqi", {{"min", s.aqi_min}, {"max", s.aqi_max}, {"mean", s.aqi_mean},
                     {"std", s.aqi_std}}},
            {"concentration", {{"min", s.conc_min}, {"max", s.conc_max}, {"mean", s.conc_mean},
                               {"std", s.conc_std}}},
            {"source_rows", total.rows_total},
            {"rows_kept", total.rows_kept},
            {"rows_dropped", total.rows_dropped}};
        detail::write_text_file(cfg.output_dir + "/series/" + pollutant_slug(pc.pollutant) +
                                    "_summary.json",
                                summary.dump(2) + "\n");
    }
    return 0;
}

/// Writes one lag dataset file per (pollutant, lag). A failure on one file
/// (for example a lag longer than the series) is reported and the rest
/// proceed; returns the number of failures.
inline int cmd_build_lags(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir + "/lags");
    int failures = 0;
    for (const auto& pc : cfg.pollutants) {
        DailySeries series;
        try {
            series = read_series_csv_file(series_path(cfg, pc.pollutant), pc.pollutant);
        } catch (const std::exception& e) {
            std::cerr << "build-lags: " << e.what() << "\n";
            failures += static_cast<int>(cfg.lags.size());
            continue;
        }
        for (int lag : cfg.lags) {
            try {
                const LagDataset ds = build_lag_dataset(series, lag);
                write_lag_csv_file(ds, cfg.output_dir + "/lags/" +
                                           pollutant_slug(pc.pollutant) + "_lag" +
                                           std::to_string(lag) + ".csv");
            } catch (const std::exception& e) {
                std::cerr << "build-lags: " << pollutant_name(pc.pollutant) << " lag " << lag
                          << ": " << e.what() << "\n";
                ++failures;
            }
        }
    }
    return failures;
}

namespace detail {

inline BenchmarkInputs load_benchmark_inputs(const RunConfig& cfg) {
    BenchmarkInputs inputs;
    for (const auto& pc : cfg.pollutants) {
        inputs.series.emplace(pc.pollutant,
                              read_series_csv_file(series_path(cfg, pc.pollutant),
                                                   pc.pollutant));
        if (!pc.breakpoints_path.empty()) {
            inputs.tables.emplace(pc.pollutant, load_breakpoint_table_file(pc.breakpoints_path));
        }
    }
    return inputs;
}

}  // namespace detail

/// Trains a single grid cell, writes its checkpoint, and prints one metric
/// line. Used for spot checks without running the whole grid.
inline int cmd_train(const RunConfig& cfg, const GridCell& cell) {
    validate_config_paths(cfg, /*need_raw_files=*/false,
                          /*need_breakpoints=*/is_physics_family(cell.family));
    const BenchmarkInputs inputs = detail::load_benchmark_inputs(cfg);
    const auto series_it = inputs.series.find(cell.pollutant);
    if (series_it == inputs.series.end()) {
        throw ValidationError("no series ingested for pollutant " +
                              std::string(pollutant_name(cell.pollutant)));
    }
    const LagDataset ds = build_lag_dataset(series_it->second, cell.lag);
    const SplitDataset split = chrono_split(ds, cfg.alpha);
    ModelSpec spec = ModelSpec::defaults(cell.family);
    spec.weights = cell.weights;
    spec.seed = cell.seed;
    apply_overrides(spec, cfg.overrides);
    const BreakpointTable* table = nullptr;
    const auto table_it = inputs.tables.find(cell.pollutant);
    if (table_it != inputs.tables.end()) table = &table_it->second;
    const auto model = train_model(split, std::move(spec), table);
    std::vector<double> test_truth;
    for (const auto& row : split.test.rows) test_truth.push_back(row.y_future_aqi);
    const MetricBundle test = compute_metrics(test_truth, predict_checked(*model, split.test));

    std::filesystem::create_directories(cfg.output_dir + "/checkpoints");
    const std::string path =
        cfg.output_dir + "/checkpoints/" + cell_slug(cell) + "_seed" +
        std::to_string(cell.seed) + ".json";
    save_checkpoint(*model, path);
    std::cout << pollutant_name(cell.pollutant) << " LAG-" << cell.lag << " "
              << family_name(cell.family) << " lambda(" << cell.weights.lambda_data << ","
              << cell.weights.lambda_phys << ")"
              << " test MAE=" << test.mae << " RMSE=" << test.rmse
              << " NMSE=" << test.nmse << " -> " << path << "\n";
    return 0;
}

/// Runs the full grid and writes report.md, results.csv, manifest.json,
/// per-cell plot data, and a timing sidecar. Returns the failed-cell count.
inline int cmd_benchmark(const RunConfig& cfg, int jobs_flag = 0) {
    validate_config_paths(cfg, /*need_raw_files=*/false, /*need_breakpoints=*/true);
    const BenchmarkInputs inputs = detail::load_benchmark_inputs(cfg);

    int jobs = jobs_flag > 0 ? jobs_flag : cfg.jobs;
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;

    const BenchmarkGrid grid = cfg.to_grid();
    const auto results = run_benchmark(inputs, grid, jobs);

    std::filesystem::create_directories(cfg.output_dir + "/plots");
    detail::write_text_file(cfg.output_dir + "/results.csv", render_results_csv(results));
    detail::write_text_file(cfg.output_dir + "/report.md", render_results_markdown(results));

    std::map<std::string, std::string> hashes;
    for (const auto& pc : cfg.pollutants) {
        hashes[std::string(pollutant_name(pc.pollutant))] =
            fnv1a64_hex(detail::read_text_file(series_path(cfg, pc.pollutant)));
        if (!pc.breakpoints_path.empty()) {
            hashes[std::string(pollutant_name(pc.pollutant)) + " breakpoints"] =
                fnv1a64_hex(detail::read_text_file(pc.breakpoints_path));
        }
    }
    const std::size_t failed = failed_cell_count(results);
    detail::write_text_file(cfg.output_dir + "/manifest.json",
                            build_manifest(grid, hashes, failed).dump(2) + "\n");

    std::string timings = "CELL,SECONDS\n";
    for (const auto& r : results) {
        timings += cell_slug(r.cell) + ',' + csv::format_double(r.wall_seconds) + '\n';
        if (r.failed) continue;
        std::string plot = "DATE,TRUE_AQI,PRED_AQI\n";
        for (std::size_t i = 0; i < r.plot_dates.size(); ++i) {
            plot += r.plot_dates[i].to_iso() + ',' + csv::format_double(r.plot_truth[i]) + ',' +
                    csv::format_double(r.plot_pred[i]) + '\n';
        }
        detail::write_text_file(cfg.output_dir + "/plots/" + cell_slug(r.cell) + ".csv", plot);
    }
    detail::write_text_file(cfg.output_dir + "/timings.csv", timings);

    for (const auto& r : results) {
        if (r.failed) {
            std::cerr << "benchmark: failed cell " << cell_slug(r.cell) << ": " << r.error
                      << "\n";
        }
    }
    std::cout << "benchmark: " << results.size() - failed << "/" << results.size()
              << " cells ok -> " << cfg.output_dir << "/report.md\n";
    return static_cast<int>(failed);
}

/// Re-renders a report from a saved results.csv.
inline int cmd_report(const std::string& results_dir, ReportFormat format) {
    std::ifstream in(results_dir + "/results.csv");
    if (!in) throw ParseError("cannot open results: " + results_dir + "/results.csv");
    const auto results = parse_results_csv(in);
    const std::string rendered = emit_report(results, format);
    const std::string path =
        results_dir + (format == ReportFormat::Markdown ? "/report.md" : "/report.csv");
    detail::write_text_file(path, rendered);
    std::cout << "report: wrote " << path << "\n";
    return 0;
}

}  // namespace aqibench
