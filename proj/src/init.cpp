#include "freqcast/init.hpp"

#include <cmath>

namespace freqcast {

Tensor xavier_uniform(std::size_t rows, std::size_t cols, RngState& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::vector<double> values(rows * cols);
    for (auto& v : values) v = (2.0 * rng.uniform() - 1.0) * limit;
    return Tensor({rows, cols}, std::move(values), true);
}

Tensor const_param(std::size_t rows, std::size_t cols, double value) {
    return Tensor({rows, cols}, value, true);
}

} // namespace freqcast
