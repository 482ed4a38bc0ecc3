#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aqibench/benchmark.hpp"
#include "aqibench/csv.hpp"
#include "aqibench/errors.hpp"
#include "aqibench/model.hpp"

namespace aqibench {

inline constexpr std::string_view kAqibenchVersion = "0.1.0";

enum class ReportFormat { Csv, Markdown };

inline std::optional<ReportFormat> report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    return std::nullopt;
}

namespace detail {

inline std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline std::string lambda_label(const LossWeights& w) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%.1f, %.1f)", w.lambda_data, w.lambda_phys);
    return buf;
}

}  // namespace detail

/// One machine-readable row per grid cell, full float precision.
inline std::string render_results_csv(const std::vector<BenchmarkResult>& results) {
    std::string out =
        "POLLUTANT,LAG,FAMILY,LAMBDA_DATA,LAMBDA_PHYS,SEED,"
        "TRAIN_MAE,TRAIN_MSE,TRAIN_RMSE,TRAIN_NMSE,TRAIN_R2,"
        "TEST_MAE,TEST_MSE,TEST_RMSE,TEST_NMSE,TEST_R2,STATUS\n";
    for (const auto& r : results) {
        out += std::string(pollutant_name(r.cell.pollutant));
        out += ',' + std::to_string(r.cell.lag);
        out += ',' + std::string(family_name(r.cell.family));
        out += ',' + csv::format_double(r.cell.weights.lambda_data);
        out += ',' + csv::format_double(r.cell.weights.lambda_phys);
        out += ',' + std::to_string(r.cell.seed);
        if (r.failed) {
            // Ten empty metric fields, then the status field.
            for (int i = 0; i < 11; ++i) out += ',';
            std::string msg = r.error;
            for (auto& ch : msg) {
                if (ch == ',' || ch == '\n') ch = ';';
            }
            out += "failed: " + msg + '\n';
            continue;
        }
        for (const MetricBundle* m : {&r.train, &r.test}) {
            out += ',' + csv::format_double(m->mae);
            out += ',' + csv::format_double(m->mse);
            out += ',' + csv::format_double(m->rmse);
            out += ',' + csv::format_double(m->nmse);
            out += ',' + csv::format_double(m->r2);
        }
        out += ",ok\n";
    }
    return out;
}

/// Markdown tables grouped by pollutant: one baseline table with a row per
/// non-physics family, then a lambda-grid table per physics family. Columns
/// are test MAE/RMSE/NMSE per lag.
inline std::string render_results_markdown(const std::vector<BenchmarkResult>& results) {
    std::vector<Pollutant> pollutants;
    std::vector<int> lags;
    for (const auto& r : results) {
        if (std::find(pollutants.begin(), pollutants.end(), r.cell.pollutant) ==
            pollutants.end()) {
            pollutants.push_back(r.cell.pollutant);
        }
        if (std::find(lags.begin(), lags.end(), r.cell.lag) == lags.end()) {
            lags.push_back(r.cell.lag);
        }
    }
    std::sort(lags.begin(), lags.end());

    std::string out = "# Benchmark report\n";
    std::string failures;

    auto header_row = [&]() {
        std::string h = " |";
        std::string sep = "|---|";
        for (int lag : lags) {
            h += " LAG-" + std::to_string(lag) + " MAE | LAG-" + std::to_string(lag) +
                 " RMSE | LAG-" + std::to_string(lag) + " NMSE |";
            sep += "---|---|---|";
        }
        return std::make_pair(h, sep);
    };

    for (Pollutant p : pollutants) {
        out += "\n## " + std::string(pollutant_name(p)) + "\n";

        using Key = std::pair<std::string, int>;  // (row label, lag)
        std::map<Key, const BenchmarkResult*> by_key;
        std::vector<ModelFamily> baseline_families;
        std::vector<ModelFamily> physics_families;
        std::vector<std::string> lambda_order;
        for (const auto& r : results) {
            if (r.cell.pollutant != p) continue;
            const std::string label = is_physics_family(r.cell.family)
                                          ? std::string(family_name(r.cell.family)) + " " +
                                                detail::lambda_label(r.cell.weights)
                                          : std::string(family_name(r.cell.family));
            by_key[{label, r.cell.lag}] = &r;
            if (is_physics_family(r.cell.family)) {
                if (std::find(physics_families.begin(), physics_families.end(), r.cell.family) ==
                    physics_families.end()) {
                    physics_families.push_back(r.cell.family);
                }
                const std::string ll = detail::lambda_label(r.cell.weights);
                if (std::find(lambda_order.begin(), lambda_order.end(), ll) ==
                    lambda_order.end()) {
                    lambda_order.push_back(ll);
                }
            } else if (std::find(baseline_families.begin(), baseline_families.end(),
                                 r.cell.family) == baseline_families.end()) {
                baseline_families.push_back(r.cell.family);
            }
            if (r.failed) {
                failures += "- " + std::string(pollutant_name(p)) + " LAG-" +
                            std::to_string(r.cell.lag) + " " + label + ": " + r.error + "\n";
            }
        }

        auto emit_row = [&](const std::string& label) {
            out += "| " + label + " |";
            for (int lag : lags) {
                auto it = by_key.find({label, lag});
                if (it == by_key.end()) {
                    out += " - | - | - |";
                } else if (it->second->failed) {
                    out += " failed | failed | failed |";
                } else {
                    const auto& m = it->second->test;
                    out += " " + detail::fixed4(m.mae) + " | " + detail::fixed4(m.rmse) + " | " +
                           detail::fixed4(m.nmse) + " |";
                }
            }
            out += "\n";
        };

        if (!baseline_families.empty()) {
            out += "\n### Baselines\n\n";
            const auto [h, sep] = header_row();
            out += "| Model" + h + "\n" + sep + "\n";
            for (ModelFamily f : baseline_families) emit_row(std::string(family_name(f)));
        }
        for (ModelFamily f : physics_families) {
            out += "\n### " + std::string(family_name(f)) + "\n\n";
            const auto [h, sep] = header_row();
            out += "| λ (data, phys)" + h + "\n" + sep + "\n";
            for (const auto& ll : lambda_order) {
                emit_row(std::string(family_name(f)) + " " + ll);
            }
        }
    }

    if (!failures.empty()) {
        out += "\n## Failed cells\n\n" + failures;
    }
    return out;
}

inline std::string emit_report(const std::vector<BenchmarkResult>& results, ReportFormat format) {
    if (results.empty()) throw ValidationError("emit_report: no results");
    switch (format) {
        case ReportFormat::Csv: return render_results_csv(results);
        case ReportFormat::Markdown: return render_results_markdown(results);
    }
    throw ValidationError("emit_report: unknown format");
}

/// Test-tail time series for plotting: one row per test sample at its
/// forecast target date.
inline std::string emit_plot_data(const FittedModel& model, const LagDataset& test) {
    const auto pred = predict_checked(model, test);
    std::string out = "DATE,TRUE_AQI,PRED_AQI\n";
    for (std::size_t i = 0; i < test.rows.size(); ++i) {
        out += test.rows[i].target_date.to_iso() + ',' +
               csv::format_double(test.rows[i].y_future_aqi) + ',' +
               csv::format_double(pred[i]) + '\n';
    }
    return out;
}

/// Inverse of render_results_csv, for re-rendering reports from a saved run.
inline std::vector<BenchmarkResult> parse_results_csv(std::istream& in) {
    std::string line;
    if (!csv::getline(in, line)) throw ParseError("results file: missing header");
    if (csv::split_line(line).size() != 17) {
        throw ParseError("results file: unexpected header layout");
    }
    std::vector<BenchmarkResult> results;
    std::size_t lineno = 1;
    while (csv::getline(in, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != 17) {
            throw ParseError("results file line " + std::to_string(lineno) +
                             ": expected 17 fields");
        }
        BenchmarkResult r;
        const auto pollutant = pollutant_from_string(fields[0]);
        const auto lag = csv::parse_long(fields[1]);
        const auto family = family_from_string(fields[2]);
        const auto ld = csv::parse_double(fields[3]);
        const auto lp = csv::parse_double(fields[4]);
        const auto seed = csv::parse_long(fields[5]);
        if (!pollutant || !lag || !family || !ld || !lp || !seed) {
            throw ParseError("results file line " + std::to_string(lineno) + ": bad cell key");
        }
        r.cell.pollutant = *pollutant;
        r.cell.lag = static_cast<int>(*lag);
        r.cell.family = *family;
        r.cell.weights = LossWeights{*ld, *lp};
        r.cell.seed = static_cast<std::uint64_t>(*seed);
        const std::string& status = fields[16];
        if (status.rfind("failed", 0) == 0) {
            r.failed = true;
            r.error = status.size() > 8 ? status.substr(8) : "";
        } else if (status == "ok") {
            auto metric = [&](std::size_t idx) {
                const auto v = csv::parse_double(fields[idx]);
                if (!v) {
                    throw ParseError("results file line " + std::to_string(lineno) +
                                     ": bad metric value");
                }
                return *v;
            };
            r.train = MetricBundle{metric(6), metric(7), metric(8), metric(9), metric(10)};
            r.test = MetricBundle{metric(11), metric(12), metric(13), metric(14), metric(15)};
        } else {
            throw ParseError("results file line " + std::to_string(lineno) +
                             ": unknown status \"" + status + "\"");
        }
        results.push_back(std::move(r));
    }
    return results;
}

// --- Run manifest ------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

/// Machine-readable record of what a benchmark run consumed. Deliberately
/// excludes wall-clock data so identical runs serialize identically.
inline nlohmann::json build_manifest(const BenchmarkGrid& grid,
                                     const std::map<std::string, std::string>& data_hashes,
                                     std::size_t failed_cells) {
    nlohmann::json j;
    j["version"] = std::string(kAqibenchVersion);
    j["seed"] = grid.seed;
    j["alpha"] = grid.alpha;
    nlohmann::json pollutants = nlohmann::json::array();
    for (Pollutant p : grid.pollutants) pollutants.push_back(std::string(pollutant_name(p)));
    j["grid"]["pollutants"] = pollutants;
    j["grid"]["lags"] = grid.lags;
    nlohmann::json families = nlohmann::json::array();
    for (ModelFamily f : grid.families) families.push_back(std::string(family_name(f)));
    j["grid"]["families"] = families;
    nlohmann::json lambdas = nlohmann::json::array();
    for (const auto& w : grid.lambda_grid) {
        lambdas.push_back({{"lambda_data", w.lambda_data}, {"lambda_phys", w.lambda_phys}});
    }
    j["grid"]["lambda_grid"] = lambdas;
    j["data_hashes"] = data_hashes;
    j["failed_cells"] = failed_cells;
    return j;
}

}  // namespace aqibench
