#pragma once

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

/// Feedforward stack Dense→ReLU per hidden layer plus a linear output.
class MlpNetwork {
  public:
    MlpNetwork(std::size_t in_features, const std::vector<std::size_t>& hidden,
               std::size_t out_features) {
        std::size_t prev = in_features;
        for (std::size_t width : hidden) {
            dense_.emplace_back(prev, width);
            prev = width;
        }
        dense_.emplace_back(prev, out_features);
        relu_.resize(hidden.size());
    }

    void init(Rng& rng) {
        for (auto& layer : dense_) layer.init(rng);
    }

    Matrix forward(const Matrix& x) {
        Matrix h = x;
        for (std::size_t i = 0; i + 1 < dense_.size(); ++i) {
            h = relu_[i].forward(dense_[i].forward(h));
        }
        return dense_.back().forward(h);
    }

    void backward(const Matrix& dy) {
        Matrix g = dense_.back().backward(dy);
        for (std::size_t i = dense_.size() - 1; i-- > 0;) {
            g = dense_[i].backward(relu_[i].backward(g));
        }
    }

    /// Cache-free forward for inference.
    Matrix infer(const Matrix& x) const {
        Matrix h = x;
        for (std::size_t i = 0; i + 1 < dense_.size(); ++i) {
            h = ReluLayer::apply(dense_[i].apply(h));
        }
        return dense_.back().apply(h);
    }

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        for (auto& layer : dense_) {
            out.push_back(&layer.W);
            out.push_back(&layer.b);
        }
        return out;
    }

    std::vector<DenseLayer>& layers() { return dense_; }
    const std::vector<DenseLayer>& layers() const { return dense_; }

  private:
    std::vector<DenseLayer> dense_;
    std::vector<ReluLayer> relu_;
};

/// MLP regressor over standard-scaled features with targets in real AQI
/// units. The physics variant shares this implementation; its extra loss
/// term is only evaluated when lambda_phys is nonzero, so a (1, 0) weighting
/// follows the exact arithmetic of the baseline.
class MlpModel : public FittedModel {
  public:
    MlpModel(ModelSpec spec, MlpNetwork network, Scaler feature_scaler, TrainingHistory history)
        : network_(std::move(network)), feature_scaler_(std::move(feature_scaler)) {
        spec_ = std::move(spec);
        history_ = std::move(history);
    }

    ModelFamily family() const override { return spec_.family; }

    std::vector<double> predict(const std::vector<LagRow>& rows) const override {
        Matrix x(rows.size(), 2);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            x(i, 0) = feature_scaler_.transform(0, rows[i].x_conc);
            x(i, 1) = feature_scaler_.transform(1, rows[i].x_aqi);
        }
        Matrix y = network_.infer(x);
        std::vector<double> out;
        out.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) out.push_back(y(i, 0));
        return out;
    }

    const Scaler& feature_scaler() const { return feature_scaler_; }
    MlpNetwork& network() { return network_; }

    nlohmann::json state_to_json() const override {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& layer : network_.layers()) {
            layers.push_back({{"W", matrix_to_json(layer.W.value)},
                              {"b", matrix_to_json(layer.b.value)}});
        }
        return {{"layers", layers}, {"feature_scaler", scaler_to_json(feature_scaler_)}};
    }

    static std::unique_ptr<MlpModel> from_json(ModelSpec spec, const nlohmann::json& state) {
        MlpNetwork network(2, spec.mlp.hidden, 1);
        const auto& layers = state.at("layers");
        if (layers.size() != network.layers().size()) {
            throw ValidationError("checkpoint: MLP layer count mismatch");
        }
        for (std::size_t i = 0; i < network.layers().size(); ++i) {
            network.layers()[i].W.value = matrix_from_json(layers[i].at("W"));
            network.layers()[i].b.value = matrix_from_json(layers[i].at("b"));
        }
        Scaler scaler = scaler_from_json(state.at("feature_scaler"));
        return std::make_unique<MlpModel>(std::move(spec), std::move(network), std::move(scaler),
                                          TrainingHistory{});
    }

  private:
    MlpNetwork network_;
    Scaler feature_scaler_;
};

inline std::unique_ptr<MlpModel> train_mlp(const SplitDataset& split, ModelSpec spec,
                                           const BreakpointTable* table = nullptr) {
    spec.validate();
    const auto& rows = split.train.rows;
    if (rows.size() < 4) throw ValidationError("train_mlp: need at least 4 training rows");
    const bool use_physics = spec.weights.lambda_phys != 0.0;
    if (use_physics && table == nullptr) {
        throw ValidationError("train_mlp: physics weighting requires a breakpoint table");
    }

    std::vector<double> conc, aqi, target;
    conc.reserve(rows.size());
    for (const auto& row : rows) {
        conc.push_back(row.x_conc);
        aqi.push_back(row.x_aqi);
        target.push_back(row.y_future_aqi);
    }
    const Scaler scaler =
        Scaler::fit(ScalerKind::Standard, {conc, aqi}, {"X_CONC", "X_AQI"});

    const std::size_t m = rows.size();
    Matrix x(m, 2);
    Matrix y(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        x(i, 0) = scaler.transform(0, conc[i]);
        x(i, 1) = scaler.transform(1, aqi[i]);
        y(i, 0) = target[i];
    }

    // Physics reference in real AQI units, constant across epochs.
    std::vector<double> phys_ref;
    if (use_physics) phys_ref = table->compute_aqi_batch(conc);

    Rng rng(spec.seed);
    MlpNetwork network(2, spec.mlp.hidden, 1);
    network.init(rng);
    Optimizer opt(spec.mlp.optimizer, network.parameters(), spec.mlp.learning_rate, 0.9, 0.999,
                  1e-8, spec.mlp.weight_decay);

    TrainingHistory history;
    const double inv_m = 1.0 / static_cast<double>(m);
    for (int epoch = 1; epoch <= spec.mlp.epochs; ++epoch) {
        Matrix pred = network.forward(x);
        double sse_data = 0.0;
        double sse_phys = 0.0;
        Matrix dy(m, 1);
        for (std::size_t i = 0; i < m; ++i) {
            const double dd = pred(i, 0) - y(i, 0);
            sse_data += dd * dd;
            dy(i, 0) = 2.0 * inv_m * spec.weights.lambda_data * dd;
            if (use_physics) {
                const double dp = pred(i, 0) - phys_ref[i];
                sse_phys += dp * dp;
                dy(i, 0) += 2.0 * inv_m * spec.weights.lambda_phys * dp;
            }
        }
        const double ld = sse_data * inv_m;
        const double lp = sse_phys * inv_m;
        const double total = total_loss(ld, lp, spec.weights);
        if (!std::isfinite(total)) {
            throw TrainingError("train_mlp: non-finite loss at epoch " + std::to_string(epoch) +
                                " (data=" + std::to_string(ld) + ", phys=" + std::to_string(lp) +
                                ", lr=" + std::to_string(opt.learning_rate()) + ")");
        }
        opt.zero_grad();
        network.backward(dy);
        opt.step();
        history.epochs.push_back(
            EpochRecord{epoch, total, ld, lp, total, opt.learning_rate()});
    }

    return std::make_unique<MlpModel>(std::move(spec), std::move(network), scaler,
                                      std::move(history));
}

}  // namespace aqibench
