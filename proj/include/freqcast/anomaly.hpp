#ifndef FREQCAST_ANOMALY_HPP
#define FREQCAST_ANOMALY_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace freqcast {

enum class DetectMode { global, rolling };

struct ThresholdStats {
    double mu_R = 0.0;
    double sigma_R = 0.0;
    double alpha = 0.0;
    double theta = 0.0;
    /// Set when alpha falls outside the recommended [2, 3] band.
    bool alpha_warning = false;
};

struct AnomalyReport {
    std::vector<double> residuals;
    ThresholdStats stats;
    std::vector<char> flags;
    DetectMode mode = DetectMode::global;
    std::size_t window = 0;
    /// Rolling mode only: per-step threshold, NaN for the warm-up prefix.
    std::vector<double> theta_series;

    std::string to_json() const;
};

constexpr double kDefaultAlpha = 2.5;
constexpr std::size_t kDefaultRollingWindow = 60;

/// Elementwise |x - x_hat|.
std::vector<double> residuals(const std::vector<double>& x,
                              const std::vector<double>& x_hat);

/// Threshold residuals at theta = mu + alpha * sigma (population sigma).
/// global: one threshold over the whole vector. rolling: statistics over a
/// trailing window of length `window` including the current point; the first
/// window-1 points are never flagged. Flags use the strict comparison
/// residual > theta.
AnomalyReport detect(const std::vector<double>& res, double alpha,
                     DetectMode mode = DetectMode::global,
                     std::size_t window = kDefaultRollingWindow);

/// Mean over all entries of 0.5*(exp(logvar) + mu^2 - 1 - logvar).
double kl_regularizer(const std::vector<double>& mu,
                      const std::vector<double>& logvar);

} // namespace freqcast

#endif
