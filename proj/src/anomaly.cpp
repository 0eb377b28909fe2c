#include "freqcast/anomaly.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace freqcast {

namespace {

ThresholdStats window_stats(const std::vector<double>& res, std::size_t begin,
                            std::size_t end, double alpha) {
    const double n = static_cast<double>(end - begin);
    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += res[i];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d = res[i] - mean;
        var += d * d;
    }
    var /= n;
    ThresholdStats s;
    s.mu_R = mean;
    s.sigma_R = std::sqrt(var);
    s.alpha = alpha;
    s.theta = s.mu_R + alpha * s.sigma_R;
    s.alpha_warning = alpha < 2.0 || alpha > 3.0;
    return s;
}

} // namespace

std::vector<double> residuals(const std::vector<double>& x,
                              const std::vector<double>& x_hat) {
    if (x.size() != x_hat.size()) {
        throw std::invalid_argument("residuals: length mismatch");
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::abs(x[i] - x_hat[i]);
    return out;
}

AnomalyReport detect(const std::vector<double>& res, double alpha, DetectMode mode,
                     std::size_t window) {
    if (res.empty()) throw std::invalid_argument("detect: empty residuals");
    if (alpha <= 0.0) throw std::invalid_argument("detect: alpha must be positive");
    for (double r : res) {
        if (std::isnan(r)) throw std::invalid_argument("detect: NaN residual");
        if (r < 0.0) throw std::invalid_argument("detect: residuals must be non-negative");
    }
    if (mode == DetectMode::rolling && window == 0) {
        throw std::invalid_argument("detect: rolling window must be positive");
    }

    AnomalyReport report;
    report.residuals = res;
    report.mode = mode;
    report.flags.assign(res.size(), 0);
    report.stats = window_stats(res, 0, res.size(), alpha);

    if (mode == DetectMode::global) {
        for (std::size_t t = 0; t < res.size(); ++t) {
            report.flags[t] = res[t] > report.stats.theta ? 1 : 0;
        }
        return report;
    }

    report.window = window;
    report.theta_series.assign(res.size(), std::nan(""));
    for (std::size_t t = window - 1; t < res.size(); ++t) {
        const ThresholdStats s = window_stats(res, t + 1 - window, t + 1, alpha);
        report.theta_series[t] = s.theta;
        report.flags[t] = res[t] > s.theta ? 1 : 0;
    }
    return report;
}

double kl_regularizer(const std::vector<double>& mu,
                      const std::vector<double>& logvar) {
    if (mu.size() != logvar.size()) {
        throw std::invalid_argument("kl_regularizer: shape mismatch");
    }
    if (mu.empty()) throw std::invalid_argument("kl_regularizer: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (std::isnan(mu[i]) || std::isnan(logvar[i])) {
            throw std::invalid_argument("kl_regularizer: NaN input");
        }
        s += 0.5 * (std::exp(logvar[i]) + mu[i] * mu[i] - 1.0 - logvar[i]);
    }
    return s / static_cast<double>(mu.size());
}

std::string AnomalyReport::to_json() const {
    nlohmann::ordered_json j;
    j["alpha"] = stats.alpha;
    j["mu_R"] = stats.mu_R;
    j["sigma_R"] = stats.sigma_R;
    j["theta"] = stats.theta;
    j["flags"] = nlohmann::json::array();
    for (char f : flags) j["flags"].push_back(f != 0);
    j["residuals"] = residuals;
    j["mode"] = mode == DetectMode::global ? "global" : "rolling";
    if (mode == DetectMode::rolling) {
        j["window"] = window;
        auto& thetas = j["theta_series"] = nlohmann::json::array();
        for (double t : theta_series) {
            if (std::isnan(t)) {
                thetas.push_back(nullptr);
            } else {
                thetas.push_back(t);
            }
        }
    }
    return j.dump(2);
}

} // namespace freqcast
