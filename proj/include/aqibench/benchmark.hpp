#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aqibench/aqi.hpp"
#include "aqibench/errors.hpp"
#include "aqibench/ingest.hpp"
#include "aqibench/lag.hpp"
#include "aqibench/metrics.hpp"
#include "aqibench/model.hpp"
#include "aqibench/models/train.hpp"

namespace aqibench {

/// One unit of benchmark work: a (pollutant, lag, family, loss-weights) cell.
struct GridCell {
    Pollutant pollutant = Pollutant::Pm25;
    int lag = 1;
    ModelFamily family = ModelFamily::Lr;
    LossWeights weights;
    std::uint64_t seed = 42;
};

struct BenchmarkResult {
    GridCell cell;
    MetricBundle train;
    MetricBundle test;
    bool failed = false;
    std::string error;
    double wall_seconds = 0.0;  // kept out of reports so reruns are byte-identical
    // Test-tail series for plot emission (target date, truth, prediction).
    std::vector<Date> plot_dates;
    std::vector<double> plot_truth;
    std::vector<double> plot_pred;
};

/// Optional scalar overrides applied on top of each family's defaults.
struct HyperOverrides {
    std::optional<int> mlp_epochs;
    std::optional<double> mlp_learning_rate;
    std::optional<int> lstm_max_epochs;
    std::optional<double> lstm_learning_rate;
    std::optional<std::size_t> lstm_batch_size;
    std::optional<double> lstm_dropout;
    std::optional<int> lstm_patience;
    std::optional<bool> sarimax_scale_exog;
    std::optional<bool> sarimax_recursive;
    std::optional<int> sarimax_max_iterations;
};

inline void apply_overrides(ModelSpec& spec, const HyperOverrides& o) {
    if (o.mlp_epochs) spec.mlp.epochs = *o.mlp_epochs;
    if (o.mlp_learning_rate) spec.mlp.learning_rate = *o.mlp_learning_rate;
    if (o.lstm_max_epochs) spec.lstm.max_epochs = *o.lstm_max_epochs;
    if (o.lstm_learning_rate) spec.lstm.learning_rate = *o.lstm_learning_rate;
    if (o.lstm_batch_size) spec.lstm.batch_size = *o.lstm_batch_size;
    if (o.lstm_dropout) spec.lstm.dropout = *o.lstm_dropout;
    if (o.lstm_patience) spec.lstm.patience = *o.lstm_patience;
    if (o.sarimax_scale_exog) spec.sarimax.scale_exog = *o.sarimax_scale_exog;
    if (o.sarimax_recursive) spec.sarimax.recursive_forecast = *o.sarimax_recursive;
    if (o.sarimax_max_iterations) spec.sarimax.max_iterations = *o.sarimax_max_iterations;
}

struct BenchmarkGrid {
    std::vector<Pollutant> pollutants = {Pollutant::Pm25, Pollutant::O3};
    std::vector<int> lags = {1, 7, 14, 30};
    std::vector<ModelFamily> families = {ModelFamily::Lr,   ModelFamily::Sarimax,
                                         ModelFamily::Mlp,  ModelFamily::MlpPhys,
                                         ModelFamily::Lstm, ModelFamily::LstmPhys};
    /// Physics families expand over these rows; others always run at (1, 0).
    std::vector<LossWeights> lambda_grid = {{0.0, 1.0}, {0.3, 0.7}, {0.5, 0.5},
                                            {0.7, 0.3}, {1.0, 0.0}};
    std::uint64_t seed = 42;
    double alpha = 0.8;
    HyperOverrides overrides;
};

/// Expands the grid in deterministic (pollutant, lag, family, lambda) order.
/// Every cell carries the shared seed so physics/baseline pairs align.
inline std::vector<GridCell> expand_grid(const BenchmarkGrid& grid) {
    std::vector<GridCell> cells;
    for (Pollutant p : grid.pollutants) {
        for (int lag : grid.lags) {
            for (ModelFamily family : grid.families) {
                if (is_physics_family(family)) {
                    for (const auto& w : grid.lambda_grid) {
                        cells.push_back(GridCell{p, lag, family, w, grid.seed});
                    }
                } else {
                    cells.push_back(GridCell{p, lag, family, LossWeights{1.0, 0.0}, grid.seed});
                }
            }
        }
    }
    return cells;
}

struct BenchmarkInputs {
    std::map<Pollutant, DailySeries> series;
    std::map<Pollutant, BreakpointTable> tables;
};

inline BenchmarkResult run_cell(const BenchmarkInputs& inputs, const GridCell& cell,
                                double alpha, const HyperOverrides& overrides) {
    BenchmarkResult result;
    result.cell = cell;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto series_it = inputs.series.find(cell.pollutant);
        if (series_it == inputs.series.end()) {
            throw ValidationError(std::string("no series loaded for ") +
                                  std::string(pollutant_name(cell.pollutant)));
        }
        const BreakpointTable* table = nullptr;
        if (is_physics_family(cell.family)) {
            const auto table_it = inputs.tables.find(cell.pollutant);
            if (table_it == inputs.tables.end()) {
                throw ValidationError(std::string("no breakpoint table loaded for ") +
                                      std::string(pollutant_name(cell.pollutant)));
            }
            table = &table_it->second;
        }

        const LagDataset ds = build_lag_dataset(series_it->second, cell.lag);
        const SplitDataset split = chrono_split(ds, alpha);

        ModelSpec spec = ModelSpec::defaults(cell.family);
        spec.weights = cell.weights;
        spec.seed = cell.seed;
        apply_overrides(spec, overrides);
        spec.validate();

        const auto model = train_model(split, std::move(spec), table);
        const auto train_pred = predict_checked(*model, split.train);
        const auto test_pred = predict_checked(*model, split.test);
        std::vector<double> train_truth, test_truth;
        for (const auto& row : split.train.rows) train_truth.push_back(row.y_future_aqi);
        for (const auto& row : split.test.rows) test_truth.push_back(row.y_future_aqi);
        result.train = compute_metrics(train_truth, train_pred);
        result.test = compute_metrics(test_truth, test_pred);
        result.plot_pred = test_pred;
        result.plot_truth = test_truth;
        for (const auto& row : split.test.rows) result.plot_dates.push_back(row.target_date);
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

/// Runs every cell; failures are recorded, not fatal. Results land in
/// expansion order regardless of the worker count, so parallel and serial
/// runs produce identical tables.
inline std::vector<BenchmarkResult> run_benchmark(const BenchmarkInputs& inputs,
                                                  const BenchmarkGrid& grid, int jobs = 1) {
    const auto cells = expand_grid(grid);
    std::vector<BenchmarkResult> results(cells.size());
    if (cells.empty()) return results;

    if (jobs < 1) jobs = 1;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), cells.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            results[i] = run_cell(inputs, cells[i], grid.alpha, grid.overrides);
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            results[i] = run_cell(inputs, cells[i], grid.alpha, grid.overrides);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

inline std::size_t failed_cell_count(const std::vector<BenchmarkResult>& results) {
    std::size_t n = 0;
    for (const auto& r : results) {
        if (r.failed) ++n;
    }
    return n;
}

}  // namespace aqibench
