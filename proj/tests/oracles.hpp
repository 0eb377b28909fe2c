#ifndef FREQCAST_TESTS_ORACLES_HPP
#define FREQCAST_TESTS_ORACLES_HPP

#include "freqcast/rng.hpp"
#include "freqcast/tensor.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace oracles {

// Direct O(N^2) DFT, the reference the fast transforms are checked against.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * M_PI * static_cast<double>(k) *
                               static_cast<double>(t) / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<double> naive_idft_real(const std::vector<std::complex<double>>& s) {
    const std::size_t n = s.size();
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = 2.0 * M_PI * static_cast<double>(k) *
                               static_cast<double>(t) / static_cast<double>(n);
            acc += s[k] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[t] = acc.real() / static_cast<double>(n);
    }
    return out;
}

// Composite Simpson quadrature of KL(N(mu, var) || N(0,1)) over a wide
// integration range; the integrand decays like a Gaussian tail.
inline double kl_quadrature(double mu, double var) {
    const double sigma = std::sqrt(var);
    const double lo = mu - 12.0 * sigma - 12.0;
    const double hi = mu + 12.0 * sigma + 12.0;
    const std::size_t n = 20000; // even
    const double h = (hi - lo) / static_cast<double>(n);
    auto f = [&](double x) {
        const double p = std::exp(-0.5 * (x - mu) * (x - mu) / var) /
                         (sigma * std::sqrt(2.0 * M_PI));
        if (p < 1e-300) return 0.0;
        const double q = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        return p * std::log(p / q);
    };
    double s = f(lo) + f(hi);
    for (std::size_t i = 1; i < n; ++i) {
        s += f(lo + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return s * h / 3.0;
}

// Brute-force transcription of the threshold rule: flag residuals above
// mean + alpha * population-std, strictly.
inline std::vector<char> detect_flags_bruteforce(const std::vector<double>& r,
                                                 double alpha) {
    double mu = 0.0;
    for (double v : r) mu += v;
    mu /= static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - mu) * (v - mu);
    var /= static_cast<double>(r.size());
    const double theta = mu + alpha * std::sqrt(var);
    std::vector<char> flags(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) flags[i] = r[i] > theta ? 1 : 0;
    return flags;
}

inline std::vector<char> detect_flags_bruteforce_rolling(const std::vector<double>& r,
                                                         double alpha, std::size_t w) {
    std::vector<char> flags(r.size(), 0);
    for (std::size_t t = w - 1; t < r.size(); ++t) {
        std::vector<double> win(r.begin() + static_cast<long>(t + 1 - w),
                                r.begin() + static_cast<long>(t + 1));
        flags[t] = detect_flags_bruteforce(win, alpha).back();
    }
    return flags;
}

// All-pairs AUC with half-credit ties.
inline double auc_pairwise(const std::vector<int>& labels,
                           const std::vector<double>& scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    return wins / static_cast<double>(pairs);
}

struct GradCheckFailure {
    std::string param;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central-difference check of every coordinate of every listed parameter.
// `eval` must rebuild the loss from scratch (reseeding any RNG it uses) so
// repeated calls are replays, not fresh draws. Passes when
// |analytic - numeric| <= abs_tol + rel_tol * max(|analytic|, |numeric|).
inline bool gradient_check(
    const std::vector<std::pair<std::string, freqcast::Tensor>>& params,
    const std::function<double()>& eval,
    const std::function<void()>& run_backward, double eps, double rel_tol,
    double abs_tol, GradCheckFailure* failure = nullptr) {
    for (auto& [name, p] : params) {
        auto param = p;
        param.zero_grad();
    }
    run_backward();
    for (auto& [name, p] : params) {
        auto param = p;
        const std::vector<double>* g = param.grad_if_any();
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double analytic = g ? (*g)[i] : 0.0;
            const double saved = param.data()[i];
            param.data()[i] = saved + eps;
            const double up = eval();
            param.data()[i] = saved - eps;
            const double down = eval();
            param.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double tol =
                abs_tol + rel_tol * std::max(std::abs(analytic), std::abs(numeric));
            if (std::abs(analytic - numeric) > tol) {
                if (failure) {
                    failure->param = name;
                    failure->index = i;
                    failure->analytic = analytic;
                    failure->numeric = numeric;
                }
                return false;
            }
        }
    }
    return true;
}

inline std::vector<double> random_vector(freqcast::RngState& rng, std::size_t n,
                                         double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

} // namespace oracles

#endif
