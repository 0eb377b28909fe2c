#ifndef FREQCAST_FREQ_ATTENTION_HPP
#define FREQCAST_FREQ_ATTENTION_HPP

#include "freqcast/ops.hpp"
#include "freqcast/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace freqcast {

enum class ModeSelection { lowest, seeded_random };

std::string mode_selection_name(ModeSelection selection);
ModeSelection mode_selection_from_name(const std::string& name);

/// Number of distinct frequency bins of a length-N real spectrum: floor(N/2)+1.
std::size_t n_frequencies(std::size_t length);

/// Picks the retained frequency indices for a series of the given length.
/// modes == length means "all bins"; otherwise 0 < modes <= ceil(length/2).
/// lowest keeps {0 .. modes-1}; seeded_random keeps DC plus modes-1 bins
/// sampled without replacement from the rest. Result is sorted ascending.
std::vector<std::size_t> select_modes(std::size_t length, std::size_t modes,
                                      ModeSelection selection, std::uint64_t seed);

struct FreqAttentionConfig {
    std::size_t d_model = 64;
    std::size_t d_k = 16;
    std::size_t n_heads = 4;
    std::size_t modes = 32;
    ModeSelection selection = ModeSelection::lowest;
    std::uint64_t mode_seed = 0;
    /// Diagnostic: replace the softmax attention matrix with the identity.
    bool identity_attention = false;

    void validate() const;
};

/// Multi-head attention where values pass through a frequency-domain
/// truncation before the attention matrix is applied: per head,
/// A = softmax(Q Kt / sqrt(d_k)) and Y = A * ifft_real(mask(fft(V))).
/// q is Tq x d_model, k and v are Tk x d_model; output is Tq x d_model.
Tensor frequency_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                           const FreqAttentionConfig& cfg);

/// Per-channel spectral filter: FFT each column, scale the retained bins by
/// learned complex weights (w_re + i*w_im, one row per retained frequency),
/// zero the rest, and return the real part of the inverse transform.
Tensor frequency_enhanced_block(const Tensor& x, const Tensor& w_re,
                                const Tensor& w_im,
                                const std::vector<std::size_t>& freqs);

} // namespace freqcast

#endif
