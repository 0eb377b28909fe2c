#ifndef FREQCAST_DECOMPOSE_HPP
#define FREQCAST_DECOMPOSE_HPP

#include <cstddef>
#include <vector>

namespace freqcast {

struct DecompositionResult {
    std::vector<double> trend;
    std::vector<double> seasonal;
};

/// Splits a series into a trailing moving-average trend and the residual
/// seasonal part. The first value is replicated to the left of the series so
/// the output has the same length as the input; trend[t] + seasonal[t]
/// reproduces x[t] exactly.
DecompositionResult decompose(const std::vector<double>& x, std::size_t window);

/// Trailing moving average with replicate padding, one column.
std::vector<double> trailing_mean(const std::vector<double>& x, std::size_t window);

} // namespace freqcast

#endif
