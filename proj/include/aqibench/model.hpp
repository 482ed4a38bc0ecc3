#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aqibench/aqi.hpp"
#include "aqibench/errors.hpp"
#include "aqibench/lag.hpp"
#include "aqibench/optim.hpp"
#include "aqibench/scaler.hpp"

namespace aqibench {

enum class ModelFamily { Lr, Sarimax, Mlp, MlpPhys, Lstm, LstmPhys };

inline std::string_view family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::Lr: return "LR";
        case ModelFamily::Sarimax: return "SARIMAX";
        case ModelFamily::Mlp: return "MLP";
        case ModelFamily::MlpPhys: return "MLP+Physics";
        case ModelFamily::Lstm: return "LSTM";
        case ModelFamily::LstmPhys: return "LSTM+Physics";
    }
    return "LR";
}

inline std::optional<ModelFamily> family_from_string(std::string_view s) {
    if (s == "LR" || s == "lr") return ModelFamily::Lr;
    if (s == "SARIMAX" || s == "sarimax") return ModelFamily::Sarimax;
    if (s == "MLP" || s == "mlp") return ModelFamily::Mlp;
    if (s == "MLP+Physics" || s == "mlp_phys" || s == "mlp+physics") return ModelFamily::MlpPhys;
    if (s == "LSTM" || s == "lstm") return ModelFamily::Lstm;
    if (s == "LSTM+Physics" || s == "lstm_phys" || s == "lstm+physics") {
        return ModelFamily::LstmPhys;
    }
    return std::nullopt;
}

inline bool is_physics_family(ModelFamily f) {
    return f == ModelFamily::MlpPhys || f == ModelFamily::LstmPhys;
}

/// The non-physics family whose architecture a physics variant mirrors.
inline ModelFamily baseline_of(ModelFamily f) {
    if (f == ModelFamily::MlpPhys) return ModelFamily::Mlp;
    if (f == ModelFamily::LstmPhys) return ModelFamily::Lstm;
    return f;
}

struct MlpHyper {
    std::vector<std::size_t> hidden = {64, 32};
    OptimizerKind optimizer = OptimizerKind::AdamW;  // Adam for the physics variant
    double learning_rate = 0.001;
    double weight_decay = 0.0;
    int epochs = 500;
};

struct LstmHyper {
    std::size_t hidden_size = 32;
    std::size_t num_layers = 2;
    std::vector<std::size_t> head = {128, 64, 32};
    double dropout = 0.1;
    double learning_rate = 0.001;
    std::size_t batch_size = 32;
    int max_epochs = 1000;
    int patience = 20;  // early stopping
    double scheduler_factor = 0.5;
    int scheduler_patience = 10;
    double scheduler_min_delta = 1e-6;
    double validation_fraction = 0.1;  // tail slice of the training split
};

struct SarimaxHyper {
    bool scale_exog = false;          // keep raw units by default
    bool recursive_forecast = false;  // default: rolling one-step-ahead
    int max_iterations = 2000;
};

/// Everything needed to reproduce one model fit. The physics weighting
/// defaults to pure data loss; non-physics families must keep it there.
struct ModelSpec {
    ModelFamily family = ModelFamily::Lr;
    LossWeights weights;  // (1, 0) unless physics-guided
    std::uint64_t seed = 42;
    MlpHyper mlp;
    LstmHyper lstm;
    SarimaxHyper sarimax;

    static ModelSpec defaults(ModelFamily family) {
        ModelSpec spec;
        spec.family = family;
        if (family == ModelFamily::MlpPhys) {
            spec.mlp.optimizer = OptimizerKind::Adam;
        }
        return spec;
    }

    void validate() const {
        weights.validate();
        if (!is_physics_family(family) && weights.lambda_phys != 0.0) {
            throw ValidationError("model spec: non-physics family requires lambda_phys = 0");
        }
        if (mlp.epochs < 1 || lstm.max_epochs < 1) {
            throw ValidationError("model spec: epoch counts must be positive");
        }
        if (mlp.learning_rate <= 0.0 || lstm.learning_rate <= 0.0) {
            throw ValidationError("model spec: learning rates must be positive");
        }
        if (lstm.batch_size < 1) {
            throw ValidationError("model spec: batch size must be positive");
        }
        if (!(lstm.validation_fraction > 0.0 && lstm.validation_fraction < 1.0)) {
            throw ValidationError("model spec: validation fraction must be in (0,1)");
        }
    }
};

struct EpochRecord {
    int epoch = 0;
    double total_loss = 0.0;
    double data_loss = 0.0;
    double phys_loss = 0.0;
    double val_loss = 0.0;
    double learning_rate = 0.0;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;
};

/// A trained model. Predictions are always in real AQI units, whatever the
/// internal scaling; rows must carry the same features used at fit time.
class FittedModel {
  public:
    virtual ~FittedModel() = default;

    virtual ModelFamily family() const = 0;
    virtual std::vector<double> predict(const std::vector<LagRow>& rows) const = 0;

    /// Family-specific learned state for checkpointing.
    virtual nlohmann::json state_to_json() const = 0;

    const ModelSpec& spec() const { return spec_; }
    const TrainingHistory& history() const { return history_; }

    Pollutant pollutant() const { return pollutant_; }
    void set_pollutant(Pollutant p) { pollutant_ = p; }

  protected:
    ModelSpec spec_;
    TrainingHistory history_;
    Pollutant pollutant_ = Pollutant::Pm25;
};

/// Predict with a pollutant guard: a model fitted on one pollutant's scalers
/// must not silently score another's rows.
inline std::vector<double> predict_checked(const FittedModel& model, const LagDataset& ds) {
    if (ds.pollutant != model.pollutant()) {
        throw ValidationError(std::string("predict: model fitted for ") +
                              std::string(pollutant_name(model.pollutant())) +
                              " given " + std::string(pollutant_name(ds.pollutant)) + " rows");
    }
    return model.predict(ds.rows);
}

// --- ModelSpec serialization -------------------------------------------------

inline nlohmann::json spec_to_json(const ModelSpec& spec) {
    nlohmann::json j;
    j["family"] = std::string(family_name(spec.family));
    j["lambda_data"] = spec.weights.lambda_data;
    j["lambda_phys"] = spec.weights.lambda_phys;
    j["seed"] = spec.seed;
    j["mlp"] = {{"hidden", spec.mlp.hidden},
                {"optimizer", std::string(optimizer_kind_name(spec.mlp.optimizer))},
                {"learning_rate", spec.mlp.learning_rate},
                {"weight_decay", spec.mlp.weight_decay},
                {"epochs", spec.mlp.epochs}};
    j["lstm"] = {{"hidden_size", spec.lstm.hidden_size},
                 {"num_layers", spec.lstm.num_layers},
                 {"head", spec.lstm.head},
                 {"dropout", spec.lstm.dropout},
                 {"learning_rate", spec.lstm.learning_rate},
                 {"batch_size", spec.lstm.batch_size},
                 {"max_epochs", spec.lstm.max_epochs},
                 {"patience", spec.lstm.patience},
                 {"scheduler_factor", spec.lstm.scheduler_factor},
                 {"scheduler_patience", spec.lstm.scheduler_patience},
                 {"scheduler_min_delta", spec.lstm.scheduler_min_delta},
                 {"validation_fraction", spec.lstm.validation_fraction}};
    j["sarimax"] = {{"scale_exog", spec.sarimax.scale_exog},
                    {"recursive_forecast", spec.sarimax.recursive_forecast},
                    {"max_iterations", spec.sarimax.max_iterations}};
    return j;
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
    ModelSpec spec;
    const auto family = family_from_string(j.at("family").get<std::string>());
    if (!family) {
        throw ValidationError("model spec: unknown family \"" +
                              j.at("family").get<std::string>() + "\"");
    }
    spec.family = *family;
    spec.weights.lambda_data = j.at("lambda_data").get<double>();
    spec.weights.lambda_phys = j.at("lambda_phys").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    const auto& m = j.at("mlp");
    spec.mlp.hidden = m.at("hidden").get<std::vector<std::size_t>>();
    const auto opt = optimizer_kind_from_string(m.at("optimizer").get<std::string>());
    if (!opt) throw ValidationError("model spec: unknown optimizer");
    spec.mlp.optimizer = *opt;
    spec.mlp.learning_rate = m.at("learning_rate").get<double>();
    spec.mlp.weight_decay = m.at("weight_decay").get<double>();
    spec.mlp.epochs = m.at("epochs").get<int>();
    const auto& l = j.at("lstm");
    spec.lstm.hidden_size = l.at("hidden_size").get<std::size_t>();
    spec.lstm.num_layers = l.at("num_layers").get<std::size_t>();
    spec.lstm.head = l.at("head").get<std::vector<std::size_t>>();
    spec.lstm.dropout = l.at("dropout").get<double>();
    spec.lstm.learning_rate = l.at("learning_rate").get<double>();
    spec.lstm.batch_size = l.at("batch_size").get<std::size_t>();
    spec.lstm.max_epochs = l.at("max_epochs").get<int>();
    spec.lstm.patience = l.at("patience").get<int>();
    spec.lstm.scheduler_factor = l.at("scheduler_factor").get<double>();
    spec.lstm.scheduler_patience = l.at("scheduler_patience").get<int>();
    spec.lstm.scheduler_min_delta = l.at("scheduler_min_delta").get<double>();
    spec.lstm.validation_fraction = l.at("validation_fraction").get<double>();
    const auto& s = j.at("sarimax");
    spec.sarimax.scale_exog = s.at("scale_exog").get<bool>();
    spec.sarimax.recursive_forecast = s.at("recursive_forecast").get<bool>();
    spec.sarimax.max_iterations = s.at("max_iterations").get<int>();
    spec.validate();
    return spec;
}

// --- Matrix / scaler serialization helpers ----------------------------------

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = m.to_vector();
    return j;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) {
        throw ValidationError("checkpoint: matrix size mismatch");
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) m.data()[i] = data[i];
    return m;
}

inline nlohmann::json scaler_to_json(const Scaler& s) {
    nlohmann::json cols = nlohmann::json::array();
    for (std::size_t c = 0; c < s.column_count(); ++c) {
        const auto& col = s.column(c);
        cols.push_back({{"name", col.name}, {"a", col.a}, {"b", col.b}});
    }
    return {{"kind", std::string(scaler_kind_name(s.kind()))}, {"columns", cols}};
}

inline Scaler scaler_from_json(const nlohmann::json& j) {
    const auto kind = scaler_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw ValidationError("checkpoint: unknown scaler kind");
    std::vector<Scaler::Column> columns;
    for (const auto& col : j.at("columns")) {
        columns.push_back(Scaler::Column{col.at("name").get<std::string>(),
                                         col.at("a").get<double>(), col.at("b").get<double>()});
    }
    return Scaler::from_coefficients(*kind, std::move(columns));
}

}  // namespace aqibench
