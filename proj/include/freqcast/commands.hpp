#ifndef FREQCAST_COMMANDS_HPP
#define FREQCAST_COMMANDS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqcast/config.hpp"

namespace freqcast {

/// A referenced file is missing or unwritable.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A referenced file exists but its contents are malformed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommandResult {
    std::vector<std::string> artifacts;
    std::string summary;
};

/// Writes <dir>/synthetic.csv and <dir>/truth.csv (date,is_anomaly).
CommandResult cmd_synth(const RunConfig& cfg, std::uint64_t seed, const std::string& dir);

/// Trains on the configured CSV (default <dir>/synthetic.csv) and writes
/// resolved_config.json, checkpoint.bin, train_log.csv and loss_curve.svg.
CommandResult cmd_train(const RunConfig& cfg, std::uint64_t seed, const std::string& dir);

/// Scores each row of the configured segment against the median of the
/// trained model's 1..horizon-step-ahead predictions for that row and writes
/// anomaly_report.json and risk_series.csv. A row needs seq_len rows of
/// history before it, so the first seq_len rows of the series are never
/// scored.
CommandResult cmd_detect(const RunConfig& cfg, std::uint64_t seed, const std::string& dir);

/// Rolling-origin forecasts over the configured segment; writes forecast.csv
/// with columns date,actual,forecast,persistence (raw close units).
CommandResult cmd_forecast(const RunConfig& cfg, std::uint64_t seed, const std::string& dir);

/// Scores the anomaly report against the truth CSV (and the forecast CSV if
/// present) and writes eval_report.json / eval_report.csv.
CommandResult cmd_evaluate(const RunConfig& cfg, std::uint64_t seed, const std::string& dir);

/// Aggregates per-seed eval reports under cfg.out_dir into aggregate.json /
/// aggregate.csv with mean and std per metric.
CommandResult cmd_report(const RunConfig& cfg);

/// Dispatch by name. A single seed runs directly in cfg.out_dir; several
/// seeds fan out to cfg.out_dir/seed_<s>/ and evaluate then also writes the
/// cross-seed aggregate.
CommandResult run_command(const RunConfig& cfg, const std::string& command);

} // namespace freqcast

#endif
