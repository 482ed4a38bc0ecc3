// Command-line front end: ingest -> build-lags -> train/benchmark -> report.
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "aqibench/commands.hpp"

namespace {

// --out flag wins over AQIBENCH_OUT, which wins over the config value.
void resolve_output_dir(aqibench::RunConfig& cfg, const std::string& out_flag) {
    if (!out_flag.empty()) {
        cfg.output_dir = out_flag;
        return;
    }
    if (const char* env = std::getenv("AQIBENCH_OUT"); env && *env) cfg.output_dir = env;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-horizon AQI forecasting benchmark"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(aqibench::kAqibenchVersion));

    std::string config_path;
    std::string out_flag;
    int jobs_flag = 0;
    long seed_flag = -1;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        sub->add_option("-c,--config", config_path, "Path to JSON run configuration")
            ->required(config_required);
        sub->add_option("-o,--out", out_flag, "Output directory (overrides AQIBENCH_OUT)");
    };

    auto* ingest = app.add_subcommand("ingest", "Parse raw daily CSVs into per-pollutant series");
    add_common(ingest, true);

    auto* lags = app.add_subcommand("build-lags", "Export supervised lag datasets from series");
    add_common(lags, true);

    auto* train = app.add_subcommand("train", "Train one model cell and save its checkpoint");
    add_common(train, true);
    std::string pollutant_arg = "pm25";
    std::string family_arg = "lr";
    int lag_arg = 1;
    double lambda_data_arg = 1.0;
    double lambda_phys_arg = 0.0;
    train->add_option("-p,--pollutant", pollutant_arg, "pm25 or o3");
    train->add_option("-l,--lag", lag_arg, "Forecast horizon in rows")->check(CLI::PositiveNumber);
    train->add_option("-f,--family", family_arg,
                      "lr | sarimax | mlp | mlp_phys | lstm | lstm_phys");
    train->add_option("--lambda-data", lambda_data_arg, "Data-loss weight");
    train->add_option("--lambda-phys", lambda_phys_arg, "Physics-loss weight");
    train->add_option("-s,--seed", seed_flag, "Override RNG seed");

    auto* bench = app.add_subcommand("benchmark", "Run the full grid and write reports");
    add_common(bench, true);
    bench->add_option("-j,--jobs", jobs_flag, "Worker threads (0 = hardware concurrency)");
    bench->add_option("-s,--seed", seed_flag, "Override RNG seed");

    auto* report = app.add_subcommand("report", "Re-render a report from a saved results.csv");
    std::string report_dir = ".";
    std::string format_arg = "markdown";
    report->add_option("-d,--dir", report_dir, "Directory containing results.csv")->required();
    report->add_option("--format", format_arg, "markdown | csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) {
            const auto format = aqibench::report_format_from_string(format_arg);
            if (!format) throw aqibench::ValidationError("unknown format: " + format_arg);
            return aqibench::cmd_report(report_dir, *format);
        }
        aqibench::RunConfig cfg = aqibench::load_config_file(config_path);
        resolve_output_dir(cfg, out_flag);
        if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);

        if (ingest->parsed()) return aqibench::cmd_ingest(cfg);
        if (lags->parsed()) return aqibench::cmd_build_lags(cfg);
        if (train->parsed()) {
            const auto pollutant = aqibench::pollutant_from_string(pollutant_arg);
            if (!pollutant) throw aqibench::ValidationError("unknown pollutant: " + pollutant_arg);
            const auto family = aqibench::family_from_string(family_arg);
            if (!family) throw aqibench::ValidationError("unknown family: " + family_arg);
            aqibench::GridCell cell;
            cell.pollutant = *pollutant;
            cell.lag = lag_arg;
            cell.family = *family;
            cell.weights = {lambda_data_arg, lambda_phys_arg};
            cell.seed = cfg.seed;
            return aqibench::cmd_train(cfg, cell);
        }
        if (bench->parsed()) return aqibench::cmd_benchmark(cfg, jobs_flag);
    } catch (const std::exception& e) {
        std::cerr << "aqibench: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
