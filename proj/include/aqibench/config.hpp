#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqibench/aqi.hpp"
#include "aqibench/benchmark.hpp"
#include "aqibench/errors.hpp"
#include "aqibench/ingest.hpp"

namespace aqibench {

/// Per-pollutant input description: raw yearly exports plus how to read them.
struct PollutantConfig {
    Pollutant pollutant = Pollutant::Pm25;
    std::vector<std::string> files;
    DateFormat date_format = DateFormat::MonthDayYear;
    ColumnMap columns;
    std::string breakpoints_path;  // may be empty when no physics family runs
};

/// Declarative description of a full run; flags may override scalars.
struct RunConfig {
    std::string output_dir = "out";
    std::uint64_t seed = 42;
    double alpha = 0.8;
    int jobs = 0;  // 0 = number of logical CPUs
    std::vector<int> lags = {1, 7, 14, 30};
    std::vector<ModelFamily> families = {ModelFamily::Lr,   ModelFamily::Sarimax,
                                         ModelFamily::Mlp,  ModelFamily::MlpPhys,
                                         ModelFamily::Lstm, ModelFamily::LstmPhys};
    std::vector<LossWeights> lambda_grid = {{0.0, 1.0}, {0.3, 0.7}, {0.5, 0.5},
                                            {0.7, 0.3}, {1.0, 0.0}};
    std::vector<PollutantConfig> pollutants;
    HyperOverrides overrides;

    BenchmarkGrid to_grid() const {
        BenchmarkGrid grid;
        grid.pollutants.clear();
        for (const auto& pc : pollutants) grid.pollutants.push_back(pc.pollutant);
        grid.lags = lags;
        grid.families = families;
        grid.lambda_grid = lambda_grid;
        grid.seed = seed;
        grid.alpha = alpha;
        grid.overrides = overrides;
        return grid;
    }
};

namespace detail {

inline ColumnMap default_columns(Pollutant p) {
    ColumnMap m;
    m.concentration = p == Pollutant::Pm25 ? "Daily Mean PM2.5 Concentration"
                                           : "Daily Max 8-hour Ozone Concentration";
    return m;
}

}  // namespace detail

/// Parses and validates a run config, accumulating every problem found so a
/// bad config reports all of its errors at once.
inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    std::vector<std::string> errors;
    auto fail = [&](const std::string& msg) { errors.push_back(msg); };

    try {
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
        if (cfg.output_dir.empty()) fail("output_dir: must not be empty");
    } catch (const nlohmann::json::exception&) {
        fail("output_dir: expected a string");
    }
    try {
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception&) {
        fail("seed: expected a non-negative integer");
    }
    try {
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha: must be in (0,1)");
    } catch (const nlohmann::json::exception&) {
        fail("alpha: expected a number");
    }
    try {
        if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
        if (cfg.jobs < 0) fail("jobs: must be >= 0");
    } catch (const nlohmann::json::exception&) {
        fail("jobs: expected an integer");
    }
    try {
        if (j.contains("lags")) cfg.lags = j.at("lags").get<std::vector<int>>();
        for (int lag : cfg.lags) {
            if (lag < 1) fail("lags: lag " + std::to_string(lag) + " must be >= 1");
        }
        if (cfg.lags.empty()) fail("lags: must not be empty");
    } catch (const nlohmann::json::exception&) {
        fail("lags: expected an array of integers");
    }
    try {
        if (j.contains("families")) {
            cfg.families.clear();
            for (const auto& f : j.at("families")) {
                const auto fam = family_from_string(f.get<std::string>());
                if (!fam) {
                    fail("families: unknown family \"" + f.get<std::string>() + "\"");
                } else {
                    cfg.families.push_back(*fam);
                }
            }
            if (cfg.families.empty()) fail("families: must not be empty");
        }
    } catch (const nlohmann::json::exception&) {
        fail("families: expected an array of strings");
    }
    try {
        if (j.contains("lambda_grid")) {
            cfg.lambda_grid.clear();
            for (const auto& row : j.at("lambda_grid")) {
                if (!row.is_array() || row.size() != 2) {
                    fail("lambda_grid: each row must be [lambda_data, lambda_phys]");
                    continue;
                }
                LossWeights w{row[0].get<double>(), row[1].get<double>()};
                try {
                    w.validate();
                } catch (const ValidationError& e) {
                    fail(std::string("lambda_grid: ") + e.what());
                }
                cfg.lambda_grid.push_back(w);
            }
            if (cfg.lambda_grid.empty()) fail("lambda_grid: must not be empty");
        }
    } catch (const nlohmann::json::exception&) {
        fail("lambda_grid: expected an array of 2-element arrays");
    }

    if (j.contains("data")) {
        if (!j.at("data").is_object()) {
            fail("data: expected an object keyed by pollutant");
        } else {
            for (const auto& [key, entry] : j.at("data").items()) {
                const auto pollutant = pollutant_from_string(key);
                if (!pollutant) {
                    fail("data: unknown pollutant \"" + key + "\"");
                    continue;
                }
                PollutantConfig pc;
                pc.pollutant = *pollutant;
                pc.columns = detail::default_columns(*pollutant);
                try {
                    pc.files = entry.at("files").get<std::vector<std::string>>();
                    if (pc.files.empty()) fail("data." + key + ".files: must not be empty");
                } catch (const nlohmann::json::exception&) {
                    fail("data." + key + ".files: expected an array of paths");
                }
                if (entry.contains("date_format")) {
                    const auto fmt =
                        date_format_from_string(entry.at("date_format").get<std::string>());
                    if (!fmt) {
                        fail("data." + key + ".date_format: expected iso, mdy, or dmy");
                    } else {
                        pc.date_format = *fmt;
                    }
                }
                if (entry.contains("columns")) {
                    const auto& cols = entry.at("columns");
                    if (cols.contains("date")) pc.columns.date = cols.at("date");
                    if (cols.contains("concentration")) {
                        pc.columns.concentration = cols.at("concentration");
                    }
                    if (cols.contains("aqi")) pc.columns.aqi = cols.at("aqi");
                    if (cols.contains("station")) pc.columns.station = cols.at("station");
                }
                if (entry.contains("breakpoints")) {
                    pc.breakpoints_path = entry.at("breakpoints").get<std::string>();
                }
                cfg.pollutants.push_back(std::move(pc));
            }
        }
    }
    if (cfg.pollutants.empty()) fail("data: at least one pollutant entry required");

    if (j.contains("hyper")) {
        const auto& h = j.at("hyper");
        auto opt_int = [&](const char* name, std::optional<int>& slot) {
            if (h.contains(name)) {
                try {
                    slot = h.at(name).get<int>();
                } catch (const nlohmann::json::exception&) {
                    fail(std::string("hyper.") + name + ": expected an integer");
                }
            }
        };
        auto opt_double = [&](const char* name, std::optional<double>& slot) {
            if (h.contains(name)) {
                try {
                    slot = h.at(name).get<double>();
                } catch (const nlohmann::json::exception&) {
                    fail(std::string("hyper.") + name + ": expected a number");
                }
            }
        };
        auto opt_bool = [&](const char* name, std::optional<bool>& slot) {
            if (h.contains(name)) {
                try {
                    slot = h.at(name).get<bool>();
                } catch (const nlohmann::json::exception&) {
                    fail(std::string("hyper.") + name + ": expected a boolean");
                }
            }
        };
        opt_int("mlp_epochs", cfg.overrides.mlp_epochs);
        opt_double("mlp_learning_rate", cfg.overrides.mlp_learning_rate);
        opt_int("lstm_max_epochs", cfg.overrides.lstm_max_epochs);
        opt_double("lstm_learning_rate", cfg.overrides.lstm_learning_rate);
        if (h.contains("lstm_batch_size")) {
            try {
                cfg.overrides.lstm_batch_size = h.at("lstm_batch_size").get<std::size_t>();
            } catch (const nlohmann::json::exception&) {
                fail("hyper.lstm_batch_size: expected a positive integer");
            }
        }
        opt_double("lstm_dropout", cfg.overrides.lstm_dropout);
        opt_int("lstm_patience", cfg.overrides.lstm_patience);
        opt_bool("sarimax_scale_exog", cfg.overrides.sarimax_scale_exog);
        opt_bool("sarimax_recursive_forecast", cfg.overrides.sarimax_recursive);
        opt_int("sarimax_max_iterations", cfg.overrides.sarimax_max_iterations);
    }

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ValidationError(msg);
    }
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

/// Checks that every referenced input path exists; breakpoint tables are
/// required only when a physics family is part of the run.
inline void validate_config_paths(const RunConfig& cfg, bool need_raw_files,
                                  bool need_breakpoints) {
    std::vector<std::string> errors;
    bool physics = false;
    for (ModelFamily f : cfg.families) physics = physics || is_physics_family(f);
    for (const auto& pc : cfg.pollutants) {
        if (need_raw_files) {
            for (const auto& file : pc.files) {
                if (!std::filesystem::exists(file)) {
                    errors.push_back("missing data file: " + file);
                }
            }
        }
        if (need_breakpoints && physics) {
            if (pc.breakpoints_path.empty()) {
                errors.push_back(std::string("no breakpoint table configured for ") +
                                 std::string(pollutant_name(pc.pollutant)));
            } else if (!std::filesystem::exists(pc.breakpoints_path)) {
                errors.push_back("missing breakpoint table: " + pc.breakpoints_path);
            }
        }
    }
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ValidationError(msg);
    }
}

}  // namespace aqibench
