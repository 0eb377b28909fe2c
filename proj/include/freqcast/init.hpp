#ifndef FREQCAST_INIT_HPP
#define FREQCAST_INIT_HPP

#include <cstddef>

#include "freqcast/rng.hpp"
#include "freqcast/tensor.hpp"

namespace freqcast {

/// Xavier/Glorot uniform init: U(-limit, limit), limit = sqrt(6/(fan_in+fan_out)).
Tensor xavier_uniform(std::size_t rows, std::size_t cols, RngState& rng);

/// Trainable matrix filled with a constant.
Tensor const_param(std::size_t rows, std::size_t cols, double value);

} // namespace freqcast

#endif
