#ifndef FREQCAST_CONFIG_HPP
#define FREQCAST_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "freqcast/anomaly.hpp"
#include "freqcast/data.hpp"
#include "freqcast/model.hpp"
#include "freqcast/risk.hpp"
#include "freqcast/training.hpp"

namespace freqcast {

/// Whole-run configuration. Loaded from JSON; unknown keys are rejected with
/// their dotted path, and resolved_json() materializes every default so the
/// emitted file is a complete record of the run.
struct RunConfig {
    std::string out_dir = "out";
    std::vector<std::uint64_t> seeds{7};

    // data section
    std::string data_csv;      // input OHLCV; empty means "generate from synth"
    std::string checkpoint;    // defaults to <out>/checkpoint.bin
    std::string truth_csv;     // defaults to <out>/truth.csv
    std::string report_json;   // defaults to <out>/anomaly_report.json
    std::string forecast_csv;  // defaults to <out>/forecast.csv
    FeatureOptions features;
    SplitRatios split;
    std::size_t window_stride = 1;

    SynthConfig synth;
    ModelConfig model;
    TrainConfig train;
    RiskConfig risk;

    // anomaly section
    double alpha = kDefaultAlpha;
    DetectMode detect_mode = DetectMode::global;
    std::size_t rolling_window = kDefaultRollingWindow;
    std::string detect_segment = "test";

    // forecast section
    std::string forecast_segment = "test";
    std::size_t forecast_stride = 0; // 0 means the model horizon

    static RunConfig from_json_text(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string resolved_json() const;
    void validate() const;
};

std::string risk_config_to_json(const RiskConfig& cfg);
RiskConfig risk_config_from_json(const std::string& text);

std::string detect_mode_name(DetectMode mode);
DetectMode detect_mode_from_name(const std::string& name);

} // namespace freqcast

#endif
