#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aqibench/aqi.hpp"
#include "aqibench/errors.hpp"
#include "aqibench/lag.hpp"
#include "aqibench/model.hpp"
#include "aqibench/nn.hpp"
#include "aqibench/optim.hpp"

namespace aqibench {

/// Stacked LSTM cells (sequence length 1) followed by a dense head with
/// ReLU + dropout on each hidden layer and a linear output.
class LstmNetwork {
  public:
    LstmNetwork(std::size_t in_features, const LstmHyper& hyper) {
        std::size_t prev = in_features;
        for (std::size_t i = 0; i < hyper.num_layers; ++i) {
            cells_.emplace_back(prev, hyper.hidden_size);
            prev = hyper.hidden_size;
        }
        for (std::size_t width : hyper.head) {
            head_.emplace_back(prev, width);
            head_relu_.emplace_back();
            head_drop_.emplace_back(hyper.dropout);
            prev = width;
        }
        head_.emplace_back(prev, 1);
    }

    void init(Rng& rng) {
        for (auto& cell : cells_) cell.init(rng);
        for (auto& layer : head_) layer.init(rng);
    }

    Matrix forward(const Matrix& x, bool training, Rng& rng) {
        Matrix h = x;
        for (auto& cell : cells_) {
            h = cell.forward(h, cell.zero_state(h.rows())).h;
        }
        for (std::size_t i = 0; i + 1 < head_.size(); ++i) {
            h = head_drop_[i].forward(head_relu_[i].forward(head_[i].forward(h)), training, rng);
        }
        return head_.back().forward(h);
    }

    void backward(const Matrix& dy) {
        Matrix g = head_.back().backward(dy);
        for (std::size_t i = head_.size() - 1; i-- > 0;) {
            g = head_[i].backward(head_relu_[i].backward(head_drop_[i].backward(g)));
        }
        for (std::size_t i = cells_.size(); i-- > 0;) {
            const Matrix dc(g.rows(), cells_[i].hidden_size());
            g = cells_[i].backward(g, dc).dx;
        }
    }

    /// Cache-free forward with dropout in evaluation mode (exact identity).
    Matrix infer(const Matrix& x) const {
        Matrix h = x;
        for (const auto& cell : cells_) {
            h = cell.apply(h, cell.zero_state(h.rows())).h;
        }
        for (std::size_t i = 0; i + 1 < head_.size(); ++i) {
            h = ReluLayer::apply(head_[i].apply(h));
        }
        return head_.back().apply(h);
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        for (auto& cell : cells_) {
            out.push_back(&cell.Wx);
            out.push_back(&cell.Wh);
            out.push_back(&cell.b);
        }
        for (auto& layer : head_) {
            out.push_back(&layer.W);
            out.push_back(&layer.b);
        }
        return out;
    }

    std::vector<LstmCell>& cells() { return cells_; }
    const std::vector<LstmCell>& cells() const { return cells_; }
    std::vector<DenseLayer>& head() { return head_; }
    const std::vector<DenseLayer>& head() const { return head_; }

  private:
    std::vector<LstmCell> cells_;
    std::vector<DenseLayer> head_;
    std::vector<ReluLayer> head_relu_;
    std::vector<DropoutLayer> head_drop_;
};

/// LSTM regressor operating in MinMax-scaled space for both features and
/// target; predictions are inverse-transformed back to real AQI units.
class LstmModel : public FittedModel {
  public:
    LstmModel(ModelSpec spec, LstmNetwork network, Scaler scaler, TrainingHistory history)
        : network_(std::move(network)), scaler_(std::move(scaler)) {
        spec_ = std::move(spec);
        history_ = std::move(history);
    }

    ModelFamily family() const override { return spec_.family; }

    std::vector<double> predict(const std::vector<LagRow>& rows) const override {
        Matrix x(rows.size(), 2);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            x(i, 0) = scaler_.transform(0, rows[i].x_conc);
            x(i, 1) = scaler_.transform(1, rows[i].x_aqi);
        }
        Matrix y = network_.infer(x);
        std::vector<double> out;
        out.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.push_back(scaler_.invert(2, y(i, 0)));
        }
        return out;
    }

    const Scaler& scaler() const { return scaler_; }
    LstmNetwork& network() { return network_; }

    nlohmann::json state_to_json() const override {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : network_.cells()) {
            cells.push_back({{"Wx", matrix_to_json(cell.Wx.value)},
                             {"Wh", matrix_to_json(cell.Wh.value)},
                             {"b", matrix_to_json(cell.b.value)}});
        }
        nlohmann::json head = nlohmann::json::array();
        for (const auto& layer : network_.head()) {
            head.push_back({{"W", matrix_to_json(layer.W.value)},
                            {"b", matrix_to_json(layer.b.value)}});
        }
        return {{"cells", cells}, {"head", head}, {"scaler", scaler_to_json(scaler_)}};
    }

    static std::unique_ptr<LstmModel> from_json(ModelSpec spec, const nlohmann::json& state) {
        LstmNetwork network(2, spec.lstm);
        const auto& cells = state.at("cells");
        const auto& head = state.at("head");
        if (cells.size() != network.cells().size() || head.size() != network.head().size()) {
            throw ValidationError("checkpoint: LSTM layer count mismatch");
        }
        for (std::size_t i = 0; i < network.cells().size(); ++i) {
            network.cells()[i].Wx.value = matrix_from_json(cells[i].at("Wx"));
            network.cells()[i].Wh.value = matrix_from_json(cells[i].at("Wh"));
            network.cells()[i].b.value = matrix_from_json(cells[i].at("b"));
        }
        for (std::size_t i = 0; i < network.head().size(); ++i) {
            network.head()[i].W.value = matrix_from_json(head[i].at("W"));
            network.head()[i].b.value = matrix_from_json(head[i].at("b"));
        }
        Scaler scaler = scaler_from_json(state.at("scaler"));
        return std::make_unique<LstmModel>(std::move(spec), std::move(network), std::move(scaler),
                                           TrainingHistory{});
    }

  private:
    LstmNetwork network_;
    Scaler scaler_;
};

inline std::unique_ptr<LstmModel> train_lstm(const SplitDataset& split, ModelSpec spec,
                                             const BreakpointTable* table = nullptr) {
    spec.validate();
    const auto& rows = split.train.rows;
    if (rows.size() < 4) throw ValidationError("train_lstm: need at least 4 training rows");
    const bool use_physics = spec.weights.lambda_phys != 0.0;
    if (use_physics && table == nullptr) {
        throw ValidationError("train_lstm: physics weighting requires a breakpoint table");
    }

    std::vector<double> conc, aqi, target;
    conc.reserve(rows.size());
    for (const auto& row : rows) {
        conc.push_back(row.x_conc);
        aqi.push_back(row.x_aqi);
        target.push_back(row.y_future_aqi);
    }
    const Scaler scaler = Scaler::fit(ScalerKind::MinMax, {conc, aqi, target},
                                      {"X_CONC", "X_AQI", "Y_AQI"}, -1.0, 1.0);

    // Validation = trailing slice of the training split; the test set is
    // never consulted during training.
    const std::size_t m = rows.size();
    std::size_t val_count = static_cast<std::size_t>(
        spec.lstm.validation_fraction * static_cast<double>(m));
    val_count = std::max<std::size_t>(1, val_count);
    const std::size_t fit_count = m - val_count;
    if (fit_count < 1) throw ValidationError("train_lstm: training split too small to validate");

    auto scaled_matrixes = [&](std::size_t begin, std::size_t count) {
        Matrix x(count, 2);
        Matrix y(count, 1);
        for (std::size_t i = 0; i < count; ++i) {
            x(i, 0) = scaler.transform(0, conc[begin + i]);
            x(i, 1) = scaler.transform(1, aqi[begin + i]);
            y(i, 0) = scaler.transform(2, target[begin + i]);
        }
        return std::make_pair(std::move(x), std::move(y));
    };
    auto [x_fit, y_fit] = scaled_matrixes(0, fit_count);
    auto [x_val, y_val] = scaled_matrixes(fit_count, val_count);

    // Physics reference in the scaled target space, constant across epochs.
    std::vector<double> phys_fit, phys_val;
    if (use_physics) {
        for (std::size_t i = 0; i < m; ++i) {
            const double ref = scaler.transform(2, table->compute_aqi(conc[i]));
            if (i < fit_count) {
                phys_fit.push_back(ref);
            } else {
                phys_val.push_back(ref);
            }
        }
    }

    Rng rng(spec.seed);
    LstmNetwork network(2, spec.lstm);
    network.init(rng);
    auto params = network.parameters();
    Optimizer opt(OptimizerKind::Adam, params, spec.lstm.learning_rate);
    PlateauScheduler scheduler(spec.lstm.scheduler_factor, spec.lstm.scheduler_patience,
                               spec.lstm.scheduler_min_delta);
    EarlyStopper stopper(spec.lstm.patience);

    auto weighted_loss = [&](const Matrix& pred, const Matrix& truth,
                             const std::vector<double>& phys, std::size_t phys_offset,
                             double* ld_out, double* lp_out) {
        double sse_d = 0.0, sse_p = 0.0;
        for (std::size_t i = 0; i < pred.rows(); ++i) {
            const double dd = pred(i, 0) - truth(i, 0);
            sse_d += dd * dd;
            if (use_physics) {
                const double dp = pred(i, 0) - phys[phys_offset + i];
                sse_p += dp * dp;
            }
        }
        const double n = static_cast<double>(pred.rows());
        const double ld = sse_d / n;
        const double lp = sse_p / n;
        if (ld_out) *ld_out = ld;
        if (lp_out) *lp_out = lp;
        return total_loss(ld, lp, spec.weights);
    };

    TrainingHistory history;
    std::vector<Matrix> best_weights = snapshot_values(params);
    const std::size_t batch = spec.lstm.batch_size;
    for (int epoch = 1; epoch <= spec.lstm.max_epochs; ++epoch) {
        double epoch_sse_d = 0.0, epoch_sse_p = 0.0;
        for (std::size_t begin = 0; begin < fit_count; begin += batch) {
            const std::size_t count = std::min(batch, fit_count - begin);
            Matrix xb(count, 2);
            Matrix yb(count, 1);
            for (std::size_t i = 0; i < count; ++i) {
                xb(i, 0) = x_fit(begin + i, 0);
                xb(i, 1) = x_fit(begin + i, 1);
                yb(i, 0) = y_fit(begin + i, 0);
            }
            Matrix pred = network.forward(xb, /*training=*/true, rng);
            Matrix dy(count, 1);
            const double inv_b = 1.0 / static_cast<double>(count);
            for (std::size_t i = 0; i < count; ++i) {
                const double dd = pred(i, 0) - yb(i, 0);
                epoch_sse_d += dd * dd;
                dy(i, 0) = 2.0 * inv_b * spec.weights.lambda_data * dd;
                if (use_physics) {
                    const double dp = pred(i, 0) - phys_fit[begin + i];
                    epoch_sse_p += dp * dp;
                    dy(i, 0) += 2.0 * inv_b * spec.weights.lambda_phys * dp;
                }
            }
            opt.zero_grad();
            network.backward(dy);
            opt.step();
        }
        const double inv_m = 1.0 / static_cast<double>(fit_count);
        const double ld = epoch_sse_d * inv_m;
        const double lp = epoch_sse_p * inv_m;
        const double train_total = total_loss(ld, lp, spec.weights);

        const Matrix val_pred = network.infer(x_val);
        const double val_loss = weighted_loss(val_pred, y_val, phys_val, 0, nullptr, nullptr);
        if (!std::isfinite(train_total) || !std::isfinite(val_loss)) {
            throw TrainingError("train_lstm: non-finite loss at epoch " + std::to_string(epoch) +
                                " (train=" + std::to_string(train_total) +
                                ", val=" + std::to_string(val_loss) + ")");
        }
        history.epochs.push_back(
            EpochRecord{epoch, train_total, ld, lp, val_loss, opt.learning_rate()});

        opt.set_learning_rate(scheduler.observe(val_loss, opt.learning_rate()));
        if (stopper.observe(val_loss)) {
            best_weights = snapshot_values(params);
        }
        if (stopper.should_stop()) break;
    }
    restore_values(params, best_weights);

    return std::make_unique<LstmModel>(std::move(spec), std::move(network), scaler,
                                       std::move(history));
}

}  // namespace aqibench
