#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "freqcast.h"

namespace {

int fail_with(fqc_status status) {
    std::fprintf(stderr, "error: %s\n", fqc_last_error());
    return static_cast<int>(status);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-enhanced forecasting, anomaly detection and risk scoring"};
    app.require_subcommand(1);

    std::string config_path, out_dir, mode;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    double alpha = 0.0;
    std::string data_path, checkpoint_path, truth_path, report_path, forecast_path;

    app.add_option("--config", config_path, "Run config JSON file");
    auto* seed_opt = app.add_option("--seed", seed, "Single RNG seed");
    app.add_option("--seeds", seeds, "Comma-separated RNG seeds")
        ->delimiter(',')
        ->excludes(seed_opt);
    app.add_option("--out", out_dir, "Output directory for artifacts");
    auto* alpha_opt = app.add_option("--alpha", alpha, "Anomaly threshold multiplier");
    app.add_option("--mode", mode, "Detection mode: global or rolling")
        ->check(CLI::IsMember({"global", "rolling"}));
    app.add_option("--data", data_path, "OHLCV CSV path");
    app.add_option("--checkpoint", checkpoint_path, "Trained checkpoint path");
    app.add_option("--truth", truth_path, "Anomaly truth CSV path");
    app.add_option("--report", report_path, "Anomaly report JSON path");
    app.add_option("--forecast-csv", forecast_path, "Forecast CSV path");

    app.add_subcommand("synth", "Generate a synthetic OHLCV series with labelled spikes");
    app.add_subcommand("train", "Train the forecaster and risk head on a CSV");
    app.add_subcommand("detect", "Flag anomalies with a trained checkpoint");
    app.add_subcommand("forecast", "Rolling-origin forecasts with the persistence baseline");
    app.add_subcommand("evaluate", "Score a report (and forecasts) against the truth");
    app.add_subcommand("report", "Aggregate per-seed evaluation reports");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    fqc_config* cfg = nullptr;
    fqc_status status = config_path.empty() ? fqc_config_default(&cfg)
                                            : fqc_config_load(config_path.c_str(), &cfg);
    if (status != FQC_OK) return fail_with(status);

    if (!out_dir.empty() && (status = fqc_config_set_out_dir(cfg, out_dir.c_str())) != FQC_OK) {
        fqc_config_free(cfg);
        return fail_with(status);
    }
    if (seed_opt->count() > 0) seeds = {seed};
    if (!seeds.empty() &&
        (status = fqc_config_set_seeds(cfg, seeds.data(), seeds.size())) != FQC_OK) {
        fqc_config_free(cfg);
        return fail_with(status);
    }
    if (alpha_opt->count() > 0 && (status = fqc_config_set_alpha(cfg, alpha)) != FQC_OK) {
        fqc_config_free(cfg);
        return fail_with(status);
    }
    if (!mode.empty() && (status = fqc_config_set_detect_mode(cfg, mode.c_str())) != FQC_OK) {
        fqc_config_free(cfg);
        return fail_with(status);
    }
    const std::pair<const char*, const std::string*> paths[] = {
        {"data", &data_path},
        {"checkpoint", &checkpoint_path},
        {"truth", &truth_path},
        {"report", &report_path},
        {"forecast", &forecast_path},
    };
    for (const auto& [key, value] : paths) {
        if (value->empty()) continue;
        if ((status = fqc_config_set_path(cfg, key, value->c_str())) != FQC_OK) {
            fqc_config_free(cfg);
            return fail_with(status);
        }
    }

    char* summary = nullptr;
    status = fqc_run(cfg, command.c_str(), &summary);
    if (status == FQC_OK && summary) std::printf("%s\n", summary);
    fqc_string_free(summary);
    fqc_config_free(cfg);
    return status == FQC_OK ? 0 : fail_with(status);
}
