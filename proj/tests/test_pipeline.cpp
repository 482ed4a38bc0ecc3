#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aqibench/commands.hpp"
#include "aqibench/models/mlp.hpp"
#include "aqibench/rng.hpp"

using namespace aqibench;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "aqibench_pipeline_tests";
    fs::create_directories(dir);
    return dir;
}

std::string mdy(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02u/%02u/%04d", d.month(), d.day(), d.year());
    return buf;
}

// Two-station synthetic export in the EPA daily layout, plus a few defect
// rows that ingest should drop.
void write_raw_csv(const fs::path& path, const Date& start, int days, unsigned seed,
                   bool with_defects) {
    Rng rng(seed);
    std::ofstream out(path);
    out << "Date,Source,Daily Mean PM2.5 Concentration,Daily AQI Value,Local Site Name\n";
    double level = 40.0;
    for (int i = 0; i < days; ++i) {
        const Date d = start.plus_days(i);
        level = 0.92 * level + 3.5 + 2.0 * rng.normal();
        const double aqi_a = std::max(1.0, level + rng.normal());
        const double aqi_b = std::max(1.0, level + rng.normal());
        // concentration tracks AQI loosely, not as an exact multiple, so the
        // regression design stays full rank
        const double conc_a = std::max(0.5, aqi_a / 4.0 + 0.8 * rng.normal());
        const double conc_b = std::max(0.5, aqi_b / 4.0 + 0.8 * rng.normal());
        out << mdy(d) << ",AQS," << csv::format_double(conc_a) << ','
            << csv::format_double(aqi_a) << ",\"Site, A\"\n";
        out << mdy(d) << ",AQS," << csv::format_double(conc_b) << ','
            << csv::format_double(aqi_b) << ",Site B\n";
    }
    if (with_defects) {
        out << "13/45/2022,AQS,5.0,30,Site B\n";     // impossible date
        out << mdy(start) << ",AQS,,30,Site B\n";    // blank concentration
        out << mdy(start) << ",AQS,5.0,n/a,Site B\n";  // non-numeric AQI
    }
}

RunConfig pipeline_config(const fs::path& root, const std::string& out_name) {
    write_raw_csv(root / "pm25_part1.csv", Date(2022, 1, 1), 150, 101, true);
    write_raw_csv(root / "pm25_part2.csv", Date(2022, 1, 1).plus_days(150), 100, 202, false);

    nlohmann::json j = {
        {"output_dir", (root / out_name).string()},
        {"lags", {1, 7}},
        {"families", {"LR"}},
        {"data",
         {{"pm25",
           {{"files",
             {(root / "pm25_part1.csv").string(), (root / "pm25_part2.csv").string()}},
            {"breakpoints", std::string(AQIBENCH_DATA_DIR) + "/breakpoints/pm25.json"}}}}},
    };
    return config_from_json(j);
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string("\"") + AQIBENCH_CLI_PATH + "\" " + args + " > \"" + log.string() +
        "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("ingest, build-lags, train, and benchmark chain end to end") {
    const fs::path root = work_dir() / "chain";
    fs::remove_all(root);
    fs::create_directories(root);
    const RunConfig cfg = pipeline_config(root, "out");

    REQUIRE(cmd_ingest(cfg) == 0);
    const std::string series_file = series_path(cfg, Pollutant::Pm25);
    REQUIRE(fs::exists(series_file));
    const DailySeries series = read_series_csv_file(series_file, Pollutant::Pm25);
    CHECK(series.rows.size() == 250);
    CHECK(series.rows.front().date.to_iso() == "2022-01-01");

    // summary sidecar reflects the dropped defect rows
    std::ifstream summary_in(cfg.output_dir + "/series/pm25_summary.json");
    REQUIRE(summary_in.good());
    nlohmann::json summary;
    summary_in >> summary;
    CHECK(summary.at("days").get<int>() == 250);
    CHECK(summary.at("rows_dropped").get<int>() == 3);
    CHECK(summary.at("rows_kept").get<int>() == 500);
    CHECK(summary.at("first_date").get<std::string>() == "2022-01-01");

    REQUIRE(cmd_build_lags(cfg) == 0);
    for (int lag : {1, 7}) {
        const std::string lag_file =
            cfg.output_dir + "/lags/pm25_lag" + std::to_string(lag) + ".csv";
        REQUIRE(fs::exists(lag_file));
        std::istringstream lag_in(detail::read_text_file(lag_file));
        std::string header;
        REQUIRE(std::getline(lag_in, header));
        CHECK(header == "DATE,X_CONC,X_AQI,Y_AQI_LAG_" + std::to_string(lag));
        std::size_t rows = 0;
        for (std::string line; std::getline(lag_in, line);) {
            if (!line.empty()) ++rows;
        }
        CHECK(rows == 250 - static_cast<std::size_t>(lag));
    }

    GridCell cell;
    cell.pollutant = Pollutant::Pm25;
    cell.lag = 7;
    cell.family = ModelFamily::Lr;
    REQUIRE(cmd_train(cfg, cell) == 0);
    const std::string ckpt = cfg.output_dir + "/checkpoints/pm25_lag7_lr_seed42.json";
    REQUIRE(fs::exists(ckpt));
    const auto model = load_checkpoint(ckpt);
    CHECK(model->pollutant() == Pollutant::Pm25);
    CHECK(model->spec().family == ModelFamily::Lr);

    REQUIRE(cmd_benchmark(cfg, 2) == 0);
    REQUIRE(fs::exists(cfg.output_dir + "/results.csv"));
    REQUIRE(fs::exists(cfg.output_dir + "/report.md"));
    REQUIRE(fs::exists(cfg.output_dir + "/manifest.json"));
    REQUIRE(fs::exists(cfg.output_dir + "/timings.csv"));
    REQUIRE(fs::exists(cfg.output_dir + "/plots/pm25_lag1_lr.csv"));
    REQUIRE(fs::exists(cfg.output_dir + "/plots/pm25_lag7_lr.csv"));

    std::ifstream results_in(cfg.output_dir + "/results.csv");
    const auto results = parse_results_csv(results_in);
    REQUIRE(results.size() == 2);
    for (const auto& r : results) CHECK_FALSE(r.failed);

    const std::string report = detail::read_text_file(cfg.output_dir + "/report.md");
    CHECK(report.find("## PM2.5") != std::string::npos);
    CHECK(report.find("| LR |") != std::string::npos);

    // re-rendering from the saved results reproduces the report byte for byte
    REQUIRE(cmd_report(cfg.output_dir, ReportFormat::Markdown) == 0);
    CHECK(detail::read_text_file(cfg.output_dir + "/report.md") == report);
}

TEST_CASE("ingest and benchmark runs are reproducible byte for byte") {
    const fs::path root = work_dir() / "repro";
    fs::remove_all(root);
    fs::create_directories(root);
    RunConfig a = pipeline_config(root, "out_a");
    RunConfig b = a;
    b.output_dir = (root / "out_b").string();

    REQUIRE(cmd_ingest(a) == 0);
    REQUIRE(cmd_ingest(b) == 0);
    CHECK(detail::read_text_file(series_path(a, Pollutant::Pm25)) ==
          detail::read_text_file(series_path(b, Pollutant::Pm25)));

    REQUIRE(cmd_benchmark(a, 1) == 0);
    REQUIRE(cmd_benchmark(b, 3) == 0);
    for (const char* name : {"/results.csv", "/report.md", "/manifest.json"}) {
        CHECK(detail::read_text_file(a.output_dir + name) ==
              detail::read_text_file(b.output_dir + name));
    }
}

TEST_CASE("a lag longer than the series is reported but does not stop the rest") {
    const fs::path root = work_dir() / "badlag";
    fs::remove_all(root);
    fs::create_directories(root);
    RunConfig cfg = pipeline_config(root, "out");
    cfg.lags = {1, 400};  // only 250 days available
    REQUIRE(cmd_ingest(cfg) == 0);
    CHECK(cmd_build_lags(cfg) == 1);
    CHECK(fs::exists(cfg.output_dir + "/lags/pm25_lag1.csv"));
    CHECK_FALSE(fs::exists(cfg.output_dir + "/lags/pm25_lag400.csv"));
}

TEST_CASE("ingest refuses to run when a data file is missing") {
    const fs::path root = work_dir() / "missing";
    fs::remove_all(root);
    fs::create_directories(root);
    RunConfig cfg = pipeline_config(root, "out");
    cfg.pollutants[0].files.push_back((root / "not_there.csv").string());
    try {
        cmd_ingest(cfg);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("not_there.csv") != std::string::npos);
    }
}

TEST_CASE("training never sees values from the test region") {
    // Two series identical up to the split boundary, different after it.
    auto make_series = [](bool perturb_tail) {
        Rng rng(77);
        DailySeries s;
        s.pollutant = Pollutant::Pm25;
        const Date d0(2022, 1, 1);
        double level = 45.0;
        for (int i = 0; i < 250; ++i) {
            level = 0.9 * level + 4.0 + 1.5 * rng.normal();
            SeriesRow row;
            row.date = d0.plus_days(i);
            row.mean_concentration = std::max(0.5, level / 4.0 + rng.normal());
            row.mean_aqi = std::max(1.0, level);
            // lag-1, alpha 0.8: training touches days 0..199 only
            if (perturb_tail && i >= 200) {
                row.mean_concentration += 37.0;
                row.mean_aqi += 123.0;
            }
            s.rows.push_back(row);
        }
        return s;
    };

    const auto split_a = chrono_split(build_lag_dataset(make_series(false), 1), 0.8);
    const auto split_b = chrono_split(build_lag_dataset(make_series(true), 1), 0.8);
    REQUIRE(split_a.train.rows.size() == split_b.train.rows.size());

    const auto ols_a = fit_ols(split_a, ModelSpec::defaults(ModelFamily::Lr));
    const auto ols_b = fit_ols(split_b, ModelSpec::defaults(ModelFamily::Lr));
    REQUIRE(ols_a->beta0() == ols_b->beta0());
    REQUIRE(ols_a->beta1() == ols_b->beta1());
    REQUIRE(ols_a->beta2() == ols_b->beta2());

    ModelSpec spec = ModelSpec::defaults(ModelFamily::Mlp);
    spec.mlp.hidden = {8, 4};
    spec.mlp.epochs = 30;
    const auto mlp_a = train_mlp(split_a, spec, nullptr);
    const auto mlp_b = train_mlp(split_b, spec, nullptr);
    const auto pa = mlp_a->predict(split_a.train.rows);
    const auto pb = mlp_b->predict(split_b.train.rows);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i] == pb[i]);
}

TEST_CASE("the command line binary drives the same pipeline") {
    const fs::path root = work_dir() / "cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const RunConfig cfg = pipeline_config(root, "out_cli");

    nlohmann::json j = {
        {"output_dir", cfg.output_dir},
        {"lags", {1}},
        {"families", {"LR"}},
        {"data",
         {{"pm25",
           {{"files", {(root / "pm25_part1.csv").string(), (root / "pm25_part2.csv").string()}},
            {"breakpoints", std::string(AQIBENCH_DATA_DIR) + "/breakpoints/pm25.json"}}}}},
    };
    const fs::path cfg_path = root / "config.json";
    detail::write_text_file(cfg_path.string(), j.dump(2));

    CHECK(run_cli("ingest -c " + cfg_path.string(), root / "ingest.log") == 0);
    CHECK(fs::exists(cfg.output_dir + "/series/pm25.csv"));
    CHECK(run_cli("build-lags -c " + cfg_path.string(), root / "lags.log") == 0);
    CHECK(run_cli("train -c " + cfg_path.string() + " -p pm25 -l 1 -f lr",
                  root / "train.log") == 0);
    CHECK(fs::exists(cfg.output_dir + "/checkpoints/pm25_lag1_lr_seed42.json"));
    CHECK(run_cli("benchmark -c " + cfg_path.string() + " -j 2", root / "bench.log") == 0);
    CHECK(fs::exists(cfg.output_dir + "/results.csv"));
    CHECK(run_cli("report -d " + cfg.output_dir + " --format csv", root / "report.log") == 0);
    CHECK(fs::exists(cfg.output_dir + "/report.csv"));
}

TEST_CASE("the binary reports configuration problems on its own stderr") {
    const fs::path root = work_dir() / "cli_err";
    fs::remove_all(root);
    fs::create_directories(root);

    const fs::path log = root / "err.log";
    CHECK(run_cli("ingest -c " + (root / "nope.json").string(), log) == 1);
    const std::string text = detail::read_text_file(log.string());
    CHECK(text.find("aqibench:") != std::string::npos);
    CHECK(text.find("nope.json") != std::string::npos);

    // config parses but points at data that is not there
    nlohmann::json j = {
        {"output_dir", (root / "out").string()},
        {"data", {{"pm25", {{"files", {(root / "ghost.csv").string()}}}}}},
    };
    const fs::path cfg_path = root / "config.json";
    detail::write_text_file(cfg_path.string(), j.dump(2));
    const fs::path log2 = root / "err2.log";
    CHECK(run_cli("ingest -c " + cfg_path.string(), log2) == 1);
    CHECK(detail::read_text_file(log2.string()).find("ghost.csv") != std::string::npos);
}

TEST_CASE("the output directory resolves flag over environment over config") {
    const fs::path root = work_dir() / "outdirs";
    fs::remove_all(root);
    fs::create_directories(root);
    pipeline_config(root, "out_cfg");  // writes the raw csv files

    nlohmann::json j = {
        {"output_dir", (root / "out_cfg").string()},
        {"lags", {1}},
        {"families", {"LR"}},
        {"data",
         {{"pm25",
           {{"files",
             {(root / "pm25_part1.csv").string(), (root / "pm25_part2.csv").string()}}}}}},
    };
    const fs::path cfg_path = root / "config.json";
    detail::write_text_file(cfg_path.string(), j.dump(2));

    // environment beats the config file
    const std::string env_prefix = "AQIBENCH_OUT=" + (root / "out_env").string() + " ";
    const std::string cmd1 = env_prefix + "\"" + AQIBENCH_CLI_PATH + "\" ingest -c " +
                             cfg_path.string() + " > /dev/null 2>&1";
    REQUIRE(std::system(cmd1.c_str()) == 0);
    CHECK(fs::exists(root / "out_env" / "series" / "pm25.csv"));
    CHECK_FALSE(fs::exists(root / "out_cfg" / "series" / "pm25.csv"));

    // the flag beats the environment
    const std::string cmd2 = env_prefix + "\"" + AQIBENCH_CLI_PATH + "\" ingest -c " +
                             cfg_path.string() + " --out " + (root / "out_flag").string() +
                             " > /dev/null 2>&1";
    REQUIRE(std::system(cmd2.c_str()) == 0);
    CHECK(fs::exists(root / "out_flag" / "series" / "pm25.csv"));
}
