#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "aqibench/models/train.hpp"
#include "aqibench/rng.hpp"

using namespace aqibench;
namespace fs = std::filesystem;

namespace {

SplitDataset make_split(std::size_t n, unsigned seed, Pollutant pollutant = Pollutant::Pm25) {
    Rng rng(seed);
    LagDataset ds;
    ds.pollutant = pollutant;
    ds.lag = 1;
    const Date d0 = *Date::parse("2022-01-01", DateFormat::Iso);
    double level = 40.0;
    for (std::size_t i = 0; i < n; ++i) {
        level += 2.0 * rng.normal();
        LagRow r;
        r.date = d0.plus_days(static_cast<int>(i));
        r.target_date = r.date.plus_days(1);
        r.x_conc = 8.0 + 0.2 * level + rng.normal();
        r.x_aqi = level;
        r.y_future_aqi = 0.8 * level + 0.4 * r.x_conc + 6.0 + rng.normal();
        ds.rows.push_back(r);
    }
    return chrono_split(ds, 0.8);
}

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "aqibench_ckpt_tests";
    fs::create_directories(dir);
    return dir / name;
}

void roundtrip_matches(const SplitDataset& split, ModelSpec spec, const std::string& file,
                       const BreakpointTable* table = nullptr) {
    const auto model = train_model(split, spec, table);
    const auto path = temp_file(file).string();
    save_checkpoint(*model, path);
    const auto reloaded = load_checkpoint(path);

    REQUIRE(reloaded->pollutant() == model->pollutant());
    REQUIRE(reloaded->spec().family == model->spec().family);
    const auto before = model->predict(split.test.rows);
    const auto after = reloaded->predict(split.test.rows);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) REQUIRE(before[i] == after[i]);
}

}  // namespace

TEST_CASE("ols checkpoints reload to identical coefficients and predictions") {
    const auto split = make_split(80, 11);
    const auto model = train_model(split, ModelSpec::defaults(ModelFamily::Lr));
    const auto path = temp_file("ols.json").string();
    save_checkpoint(*model, path);
    const auto reloaded = load_checkpoint(path);

    const auto* a = dynamic_cast<const OlsModel*>(model.get());
    const auto* b = dynamic_cast<const OlsModel*>(reloaded.get());
    REQUIRE(a != nullptr);
    REQUIRE(b != nullptr);
    REQUIRE(a->beta0() == b->beta0());
    REQUIRE(a->beta1() == b->beta1());
    REQUIRE(a->beta2() == b->beta2());
    const auto pa = a->predict(split.test.rows);
    const auto pb = b->predict(split.test.rows);
    for (std::size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i] == pb[i]);
}

TEST_CASE("sarimax checkpoints carry the fitted history needed to forecast") {
    roundtrip_matches(make_split(120, 21), ModelSpec::defaults(ModelFamily::Sarimax),
                      "sarimax.json");
}

TEST_CASE("mlp checkpoints reload to bitwise identical predictions") {
    ModelSpec spec = ModelSpec::defaults(ModelFamily::Mlp);
    spec.mlp.hidden = {8, 4};
    spec.mlp.epochs = 40;
    roundtrip_matches(make_split(80, 31), spec, "mlp.json");
}

TEST_CASE("lstm checkpoints reload to bitwise identical predictions") {
    ModelSpec spec = ModelSpec::defaults(ModelFamily::Lstm);
    spec.lstm.hidden_size = 8;
    spec.lstm.num_layers = 1;
    spec.lstm.head = {8};
    spec.lstm.max_epochs = 25;
    roundtrip_matches(make_split(80, 41), spec, "lstm.json");
}

TEST_CASE("physics-guided mlp checkpoint keeps the loss weights") {
    const auto table =
        load_breakpoint_table_file(std::string(AQIBENCH_DATA_DIR) + "/breakpoints/pm25.json");
    ModelSpec spec = ModelSpec::defaults(ModelFamily::MlpPhys);
    spec.weights = {0.7, 0.3};
    spec.mlp.hidden = {8};
    spec.mlp.epochs = 30;
    const auto split = make_split(80, 51);
    const auto model = train_model(split, spec, &table);
    const auto path = temp_file("mlp_phys.json").string();
    save_checkpoint(*model, path);
    const auto reloaded = load_checkpoint(path);
    CHECK(reloaded->spec().family == ModelFamily::MlpPhys);
    CHECK(reloaded->spec().weights.lambda_data == 0.7);
    CHECK(reloaded->spec().weights.lambda_phys == 0.3);
}

TEST_CASE("model spec json round-trips every hyperparameter") {
    ModelSpec spec = ModelSpec::defaults(ModelFamily::LstmPhys);
    spec.weights = {0.9, 0.1};
    spec.seed = 1234;
    spec.mlp.hidden = {5, 6, 7};
    spec.mlp.optimizer = OptimizerKind::AdamW;
    spec.mlp.learning_rate = 0.002;
    spec.mlp.weight_decay = 0.01;
    spec.mlp.epochs = 123;
    spec.lstm.hidden_size = 9;
    spec.lstm.num_layers = 3;
    spec.lstm.head = {10, 11};
    spec.lstm.dropout = 0.25;
    spec.lstm.learning_rate = 0.005;
    spec.lstm.batch_size = 7;
    spec.lstm.max_epochs = 77;
    spec.lstm.patience = 4;
    spec.lstm.scheduler_factor = 0.25;
    spec.lstm.scheduler_patience = 3;
    spec.lstm.scheduler_min_delta = 1e-5;
    spec.lstm.validation_fraction = 0.2;
    spec.sarimax.scale_exog = true;
    spec.sarimax.recursive_forecast = true;
    spec.sarimax.max_iterations = 555;

    const ModelSpec back = spec_from_json(spec_to_json(spec));
    CHECK(back.family == spec.family);
    CHECK(back.weights.lambda_data == spec.weights.lambda_data);
    CHECK(back.weights.lambda_phys == spec.weights.lambda_phys);
    CHECK(back.seed == spec.seed);
    CHECK(back.mlp.hidden == spec.mlp.hidden);
    CHECK(back.mlp.optimizer == spec.mlp.optimizer);
    CHECK(back.mlp.learning_rate == spec.mlp.learning_rate);
    CHECK(back.mlp.weight_decay == spec.mlp.weight_decay);
    CHECK(back.mlp.epochs == spec.mlp.epochs);
    CHECK(back.lstm.hidden_size == spec.lstm.hidden_size);
    CHECK(back.lstm.num_layers == spec.lstm.num_layers);
    CHECK(back.lstm.head == spec.lstm.head);
    CHECK(back.lstm.dropout == spec.lstm.dropout);
    CHECK(back.lstm.learning_rate == spec.lstm.learning_rate);
    CHECK(back.lstm.batch_size == spec.lstm.batch_size);
    CHECK(back.lstm.max_epochs == spec.lstm.max_epochs);
    CHECK(back.lstm.patience == spec.lstm.patience);
    CHECK(back.lstm.scheduler_factor == spec.lstm.scheduler_factor);
    CHECK(back.lstm.scheduler_patience == spec.lstm.scheduler_patience);
    CHECK(back.lstm.scheduler_min_delta == spec.lstm.scheduler_min_delta);
    CHECK(back.lstm.validation_fraction == spec.lstm.validation_fraction);
    CHECK(back.sarimax.scale_exog == spec.sarimax.scale_exog);
    CHECK(back.sarimax.recursive_forecast == spec.sarimax.recursive_forecast);
    CHECK(back.sarimax.max_iterations == spec.sarimax.max_iterations);
}

TEST_CASE("pollutant is preserved and enforced at predict time") {
    const auto split = make_split(60, 61, Pollutant::O3);
    const auto model = train_model(split, ModelSpec::defaults(ModelFamily::Lr));
    const auto path = temp_file("o3.json").string();
    save_checkpoint(*model, path);
    const auto reloaded = load_checkpoint(path);
    CHECK(reloaded->pollutant() == Pollutant::O3);

    const auto wrong = make_split(60, 61, Pollutant::Pm25);
    CHECK_THROWS_AS(predict_checked(*reloaded, wrong.test), ValidationError);
    CHECK_NOTHROW(predict_checked(*reloaded, split.test));
}

TEST_CASE("unsupported format versions and corrupt files are rejected") {
    const auto split = make_split(60, 71);
    const auto model = train_model(split, ModelSpec::defaults(ModelFamily::Lr));

    nlohmann::json j = checkpoint_to_json(*model);
    j["format_version"] = 999;
    CHECK_THROWS_AS(checkpoint_from_json(j), ValidationError);

    nlohmann::json missing = checkpoint_to_json(*model);
    missing.erase("state");
    CHECK_THROWS(checkpoint_from_json(missing));

    const auto path = temp_file("corrupt.json").string();
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/x.json"), ParseError);
}
