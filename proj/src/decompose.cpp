#include "freqcast/decompose.hpp"

#include <stdexcept>

namespace freqcast {

std::vector<double> trailing_mean(const std::vector<double>& x, std::size_t window) {
    if (window == 0) throw std::invalid_argument("trailing_mean: window must be positive");
    if (x.empty()) throw std::invalid_argument("trailing_mean: empty series");
    std::vector<double> out(x.size());
    // Running sum over the trailing window; indices below zero read x[0].
    double sum = static_cast<double>(window) * x[0];
    const double inv_w = 1.0 / static_cast<double>(window);
    for (std::size_t t = 0; t < x.size(); ++t) {
        sum += x[t] - (t >= window ? x[t - window] : x[0]);
        out[t] = sum * inv_w;
    }
    return out;
}

DecompositionResult decompose(const std::vector<double>& x, std::size_t window) {
    DecompositionResult r;
    r.trend = trailing_mean(x, window);
    r.seasonal.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) r.seasonal[t] = x[t] - r.trend[t];
    return r;
}

} // namespace freqcast
