#include "freqcast/freq_attention.hpp"

#include "freqcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace freqcast {

std::string mode_selection_name(ModeSelection selection) {
    return selection == ModeSelection::lowest ? "lowest" : "seeded_random";
}

ModeSelection mode_selection_from_name(const std::string& name) {
    if (name == "lowest") return ModeSelection::lowest;
    if (name == "seeded_random") return ModeSelection::seeded_random;
    throw std::invalid_argument("mode_selection: expected \"lowest\" or \"seeded_random\", got \"" +
                                name + "\"");
}

std::size_t n_frequencies(std::size_t length) { return length / 2 + 1; }

std::vector<std::size_t> select_modes(std::size_t length, std::size_t modes,
                                      ModeSelection selection, std::uint64_t seed) {
    if (length == 0) throw std::invalid_argument("select_modes: empty length");
    if (modes == 0) throw std::invalid_argument("select_modes: modes must be positive");
    const std::size_t max_bin = length / 2;
    if (modes == length) {
        std::vector<std::size_t> all(max_bin + 1);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    const std::size_t half_up = (length + 1) / 2;
    if (modes > half_up) {
        throw std::invalid_argument(
            "select_modes: modes exceeds ceil(length/2); use modes == length for all bins");
    }
    if (selection == ModeSelection::lowest) {
        std::vector<std::size_t> out(modes);
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    // DC always kept; the remaining modes-1 bins are drawn without
    // replacement from {1 .. max_bin}.
    std::vector<std::size_t> pool(max_bin);
    std::iota(pool.begin(), pool.end(), std::size_t{1});
    RngState rng(seed);
    std::vector<std::size_t> out{0};
    for (std::size_t i = 0; i + 1 < modes; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void FreqAttentionConfig::validate() const {
    if (d_model == 0 || d_k == 0 || n_heads == 0) {
        throw std::invalid_argument("freq attention: dimensions must be positive");
    }
    if (d_model != n_heads * d_k) {
        throw std::invalid_argument("freq attention: d_model must equal n_heads * d_k");
    }
    if (modes == 0) throw std::invalid_argument("freq attention: modes must be positive");
}

namespace {

Tensor identity_matrix(std::size_t n) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    return Tensor({n, n}, std::move(v), false);
}

Tensor filtered_values(const Tensor& vh, const std::vector<std::size_t>& freqs) {
    DftPair spec = dft_cols(vh);
    const Tensor mask = mode_mask(vh.rows(), vh.cols(), freqs);
    return idft_real_cols(mul(spec.re, mask), mul(spec.im, mask));
}

} // namespace

Tensor frequency_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                           const FreqAttentionConfig& cfg) {
    cfg.validate();
    if (q.cols() != cfg.d_model || k.cols() != cfg.d_model || v.cols() != cfg.d_model) {
        throw std::invalid_argument("frequency_attention: width must equal d_model");
    }
    if (k.rows() != v.rows()) {
        throw std::invalid_argument("frequency_attention: K and V lengths differ");
    }
    const std::size_t tk = k.rows();
    if (cfg.modes != tk && cfg.modes > (tk + 1) / 2) {
        throw std::invalid_argument("frequency_attention: modes exceed sequence length");
    }
    if (cfg.identity_attention && q.rows() != tk) {
        throw std::invalid_argument("frequency_attention: identity bypass needs equal lengths");
    }
    const std::vector<std::size_t> freqs =
        select_modes(tk, cfg.modes, cfg.selection, cfg.mode_seed);
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(cfg.d_k));

    std::vector<Tensor> heads;
    heads.reserve(cfg.n_heads);
    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
        const std::size_t c0 = h * cfg.d_k;
        const std::size_t c1 = c0 + cfg.d_k;
        const Tensor vt = filtered_values(slice_cols(v, c0, c1), freqs);
        Tensor a;
        if (cfg.identity_attention) {
            a = identity_matrix(tk);
        } else {
            const Tensor qh = slice_cols(q, c0, c1);
            const Tensor kh = slice_cols(k, c0, c1);
            a = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt_dk));
        }
        heads.push_back(matmul(a, vt));
    }
    return concat_cols(heads);
}

Tensor frequency_enhanced_block(const Tensor& x, const Tensor& w_re,
                                const Tensor& w_im,
                                const std::vector<std::size_t>& freqs) {
    DftPair spec = dft_cols(x);
    DftPair filtered = frequency_filter(spec.re, spec.im, w_re, w_im, freqs);
    return idft_real_cols(filtered.re, filtered.im);
}

} // namespace freqcast
