#pragma once

#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "aqibench/aqi.hpp"
#include "aqibench/errors.hpp"
#include "aqibench/lag.hpp"
#include "aqibench/model.hpp"
#include "aqibench/models/lstm.hpp"
#include "aqibench/models/mlp.hpp"
#include "aqibench/models/ols.hpp"
#include "aqibench/models/sarimax.hpp"

namespace aqibench {

/// Fits the family named in the spec. Physics-guided families need the
/// breakpoint table of the dataset's pollutant; others ignore it.
inline std::unique_ptr<FittedModel> train_model(const SplitDataset& split, ModelSpec spec,
                                                const BreakpointTable* table = nullptr) {
    if (table != nullptr && table->pollutant() != split.train.pollutant) {
        throw ValidationError("train_model: breakpoint table pollutant mismatch");
    }
    std::unique_ptr<FittedModel> model;
    switch (spec.family) {
        case ModelFamily::Lr:
            model = fit_ols(split, std::move(spec));
            break;
        case ModelFamily::Sarimax:
            model = fit_sarimax(split, std::move(spec));
            break;
        case ModelFamily::Mlp:
        case ModelFamily::MlpPhys:
            model = train_mlp(split, std::move(spec), table);
            break;
        case ModelFamily::Lstm:
        case ModelFamily::LstmPhys:
            model = train_lstm(split, std::move(spec), table);
            break;
    }
    model->set_pollutant(split.train.pollutant);
    return model;
}

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_to_json(const FittedModel& model) {
    return {{"format_version", kCheckpointVersion},
            {"pollutant", std::string(pollutant_name(model.pollutant()))},
            {"spec", spec_to_json(model.spec())},
            {"state", model.state_to_json()}};
}

inline std::unique_ptr<FittedModel> checkpoint_from_json(const nlohmann::json& j) {
    if (j.value("format_version", -1) != kCheckpointVersion) {
        throw ValidationError("checkpoint: unsupported format version");
    }
    ModelSpec spec = spec_from_json(j.at("spec"));
    const auto pollutant = pollutant_from_string(j.at("pollutant").get<std::string>());
    if (!pollutant) throw ValidationError("checkpoint: unknown pollutant");
    std::unique_ptr<FittedModel> model;
    const auto& state = j.at("state");
    switch (spec.family) {
        case ModelFamily::Lr:
            model = OlsModel::from_json(std::move(spec), state);
            break;
        case ModelFamily::Sarimax:
            model = SarimaxModel::from_json(std::move(spec), state);
            break;
        case ModelFamily::Mlp:
        case ModelFamily::MlpPhys:
            model = MlpModel::from_json(std::move(spec), state);
            break;
        case ModelFamily::Lstm:
        case ModelFamily::LstmPhys:
            model = LstmModel::from_json(std::move(spec), state);
            break;
    }
    model->set_pollutant(*pollutant);
    return model;
}

inline void save_checkpoint(const FittedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open checkpoint for writing: " + path);
    out << checkpoint_to_json(model).dump(2) << '\n';
}

inline std::unique_ptr<FittedModel> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace aqibench
