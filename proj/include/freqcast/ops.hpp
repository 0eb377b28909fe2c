#ifndef FREQCAST_OPS_HPP
#define FREQCAST_OPS_HPP

#include "freqcast/rng.hpp"
#include "freqcast/tensor.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace freqcast {

// Elementwise and linear algebra. All ops record graph nodes when gradient
// tracking is enabled and any input requires a gradient.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);

/// x is r x c, bias has c entries; adds the bias to every row.
Tensor add_rowvec(const Tensor& x, const Tensor& bias);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

/// Row-wise softmax with max-subtraction. Throws on non-finite input.
Tensor softmax_rows(const Tensor& x);

Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp_elem(const Tensor& x);

Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
/// Mean over rows: r x c -> 1 x c.
Tensor mean_rows(const Tensor& x);

Tensor mse_loss(const Tensor& pred, const Tensor& target);
Tensor l1_loss(const Tensor& pred, const Tensor& target);
/// Mean binary cross-entropy of probabilities against {0,1} targets.
/// Probabilities are clamped to [1e-12, 1-1e-12] before the logs.
Tensor bce_loss(const Tensor& prob, const Tensor& target);
/// Mean over all entries of 0.5*(exp(logvar) + mu^2 - 1 - logvar), the
/// closed-form divergence of N(mu, exp(logvar)) from N(0, 1) per dimension.
Tensor kl_gaussian(const Tensor& mu, const Tensor& logvar);

Tensor slice_cols(const Tensor& x, std::size_t col_begin, std::size_t col_end);
Tensor concat_cols(const std::vector<Tensor>& parts);

/// Inverted dropout: zeroes entries with probability `rate` and scales the
/// survivors by 1/(1-rate). Identity when training is false. Consumes one
/// uniform draw per element whenever active, so a reseeded RngState replays
/// the exact mask.
Tensor dropout(const Tensor& x, double rate, RngState& rng, bool training);

/// Trailing moving average down each column with replicate padding at the
/// left edge (x[-j] := x[0]).
Tensor causal_moving_average(const Tensor& x, std::size_t window);

struct DftPair {
    Tensor re;
    Tensor im;
};

/// Unnormalized forward DFT of each column of a real matrix.
DftPair dft_cols(const Tensor& x);

/// Real part of the 1/N-normalized inverse DFT of each column.
Tensor idft_real_cols(const Tensor& re, const Tensor& im);

/// Learned per-frequency complex filter applied to a column spectrum.
///
/// For each retained frequency f = freqs[j] and channel c, bin f is scaled by
/// w[j,c] = w_re[j,c] + i*w_im[j,c] and its mirror bin N-f by the conjugate,
/// so a conjugate-symmetric input spectrum stays conjugate-symmetric.
/// Self-paired bins (DC, Nyquist) use only the real part of the weight.
/// Bins at non-retained frequencies are zeroed.
DftPair frequency_filter(const Tensor& re, const Tensor& im, const Tensor& w_re,
                         const Tensor& w_im, const std::vector<std::size_t>& freqs);

/// 0/1 matrix passing exactly the bins belonging to the given frequencies.
Tensor mode_mask(std::size_t length, std::size_t channels,
                 const std::vector<std::size_t>& freqs);

} // namespace freqcast

#endif
