#ifndef FREQCAST_MODEL_HPP
#define FREQCAST_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freqcast/freq_attention.hpp"
#include "freqcast/rng.hpp"
#include "freqcast/tensor.hpp"

namespace freqcast {

struct ModelConfig {
    std::size_t seq_len = 256;
    std::size_t horizon = 24;
    std::size_t feature_dim = 7;
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_encoder_layers = 2;
    std::size_t n_decoder_layers = 1;
    std::size_t modes = 32;
    ModeSelection mode_selection = ModeSelection::lowest;
    std::uint64_t mode_seed = 0;
    std::size_t trend_window = 25;
    std::size_t ffn_dim = 0; // 0 means 2 * d_model
    double dropout_rate = 0.1;
    std::size_t latent_dim = 32;

    std::size_t resolved_ffn_dim() const { return ffn_dim == 0 ? 2 * d_model : ffn_dim; }
    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

struct ForwardOutput {
    Tensor forecast;       // horizon x 1, scaled close
    Tensor reconstruction; // seq_len x 1, scaled close
    Tensor latent;         // seq_len x latent_dim
    Tensor latent_mu;      // seq_len x latent_dim
    Tensor latent_logvar;  // seq_len x latent_dim
};

/// Frequency-enhanced decomposition forecaster.
///
/// The input window is embedded, split into trend and seasonal parts by a
/// causal moving average, and the seasonal part runs through encoder layers
/// whose mixing step is a learned filter over the retained Fourier modes. The
/// trend part is extrapolated over the horizon by a learned time-axis
/// projection, and that extrapolation seeds a decoder that cross-attends to
/// the encoder output in the frequency domain. Trend and seasonal readout
/// heads are shared between the forecast and the in-window reconstruction.
class Model {
  public:
    Model() = default;
    Model(const ModelConfig& cfg, RngState& rng);

    /// x: seq_len x feature_dim (scaled features). When training is true,
    /// dropout masks are drawn from `rng`; inference ignores the RNG entirely.
    ForwardOutput forward(const Tensor& x, RngState& rng, bool training) const;

    const ModelConfig& config() const { return cfg_; }
    std::vector<std::pair<std::string, Tensor>> parameters() const;

    void save(const std::string& path) const;
    static Model load(const std::string& path);

  private:
    struct Ffn {
        Tensor w1, b1, w2, b2;
    };
    struct EncoderLayer {
        Tensor filter_re, filter_im; // (n_freq) x d_model learned filter
        Ffn ffn;
    };
    struct DecoderLayer {
        Tensor wq, wk, wv, wo;
        Ffn ffn;
    };

    Tensor apply_ffn(const Ffn& f, const Tensor& x) const;

    ModelConfig cfg_;
    std::vector<std::size_t> enc_freqs_; // retained bins for seq_len
    Tensor embed_w_, embed_b_;
    std::vector<EncoderLayer> encoder_;
    Tensor trend_proj_; // horizon x seq_len time-axis extrapolation
    std::vector<DecoderLayer> decoder_;
    Tensor head_trend_w_, head_trend_b_;
    Tensor head_seasonal_w_, head_seasonal_b_;
    Tensor latent_w_, latent_b_;
    Tensor mu_w_, mu_b_;
    Tensor logvar_w_, logvar_b_;
};

/// Reparameterised draw: training -> mu + exp(logvar/2) * eps with
/// eps ~ N(0, 1) from `rng`; inference -> mu.
Tensor latent_sample(const Tensor& mu, const Tensor& logvar, RngState& rng, bool training);

} // namespace freqcast

#endif
