#include "freqcast/model.hpp"

#include <cmath>
#include <stdexcept>

#include "freqcast/checkpoint.hpp"
#include "freqcast/decompose.hpp"
#include "freqcast/init.hpp"
#include "freqcast/ops.hpp"

#include "json.hpp"

namespace freqcast {

void ModelConfig::validate() const {
    if (horizon == 0) throw std::invalid_argument("ModelConfig: horizon must be positive");
    if (seq_len <= horizon)
        throw std::invalid_argument("ModelConfig: seq_len must exceed horizon");
    if (feature_dim == 0) throw std::invalid_argument("ModelConfig: feature_dim must be positive");
    if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0)
        throw std::invalid_argument("ModelConfig: d_model must be a positive multiple of n_heads");
    if (n_encoder_layers == 0)
        throw std::invalid_argument("ModelConfig: at least one encoder layer required");
    if (trend_window == 0)
        throw std::invalid_argument("ModelConfig: trend_window must be positive");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw std::invalid_argument("ModelConfig: dropout_rate must be in [0, 1)");
    if (latent_dim == 0) throw std::invalid_argument("ModelConfig: latent_dim must be positive");
    select_modes(seq_len, modes, mode_selection, mode_seed); // throws if incompatible
}

std::string ModelConfig::to_json() const {
    nlohmann::ordered_json j;
    j["seq_len"] = seq_len;
    j["horizon"] = horizon;
    j["feature_dim"] = feature_dim;
    j["d_model"] = d_model;
    j["n_heads"] = n_heads;
    j["n_encoder_layers"] = n_encoder_layers;
    j["n_decoder_layers"] = n_decoder_layers;
    j["modes"] = modes;
    j["mode_selection"] = mode_selection_name(mode_selection);
    j["mode_seed"] = mode_seed;
    j["trend_window"] = trend_window;
    j["ffn_dim"] = ffn_dim;
    j["dropout_rate"] = dropout_rate;
    j["latent_dim"] = latent_dim;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("model config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("model config: expected a JSON object");
    ModelConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "seq_len") cfg.seq_len = value.get<std::size_t>();
        else if (key == "horizon") cfg.horizon = value.get<std::size_t>();
        else if (key == "feature_dim") cfg.feature_dim = value.get<std::size_t>();
        else if (key == "d_model") cfg.d_model = value.get<std::size_t>();
        else if (key == "n_heads") cfg.n_heads = value.get<std::size_t>();
        else if (key == "n_encoder_layers") cfg.n_encoder_layers = value.get<std::size_t>();
        else if (key == "n_decoder_layers") cfg.n_decoder_layers = value.get<std::size_t>();
        else if (key == "modes") cfg.modes = value.get<std::size_t>();
        else if (key == "mode_selection") cfg.mode_selection = mode_selection_from_name(value.get<std::string>());
        else if (key == "mode_seed") cfg.mode_seed = value.get<std::uint64_t>();
        else if (key == "trend_window") cfg.trend_window = value.get<std::size_t>();
        else if (key == "ffn_dim") cfg.ffn_dim = value.get<std::size_t>();
        else if (key == "dropout_rate") cfg.dropout_rate = value.get<double>();
        else if (key == "latent_dim") cfg.latent_dim = value.get<std::size_t>();
        else throw std::invalid_argument("model config: unknown key \"" + key + "\"");
    }
    return cfg;
}

namespace {

Tensor persistence_projection(std::size_t horizon, std::size_t seq_len) {
    // Each forecast step starts as a copy of the last in-window state.
    std::vector<double> values(horizon * seq_len, 0.0);
    for (std::size_t r = 0; r < horizon; ++r) values[r * seq_len + (seq_len - 1)] = 1.0;
    return Tensor({horizon, seq_len}, std::move(values), true);
}

} // namespace

Model::Model(const ModelConfig& cfg, RngState& rng) : cfg_(cfg) {
    cfg.validate();
    enc_freqs_ = select_modes(cfg.seq_len, cfg.modes, cfg.mode_selection, cfg.mode_seed);
    const std::size_t d = cfg.d_model;
    const std::size_t h = cfg.resolved_ffn_dim();
    const std::size_t nf = enc_freqs_.size();

    embed_w_ = xavier_uniform(cfg.feature_dim, d, rng);
    embed_b_ = const_param(1, d, 0.0);
    for (std::size_t i = 0; i < cfg.n_encoder_layers; ++i) {
        EncoderLayer layer;
        layer.filter_re = const_param(nf, d, 1.0); // start as an identity filter
        layer.filter_im = const_param(nf, d, 0.0);
        layer.ffn = {xavier_uniform(d, h, rng), const_param(1, h, 0.0),
                     xavier_uniform(h, d, rng), const_param(1, d, 0.0)};
        encoder_.push_back(std::move(layer));
    }
    trend_proj_ = persistence_projection(cfg.horizon, cfg.seq_len);
    for (std::size_t i = 0; i < cfg.n_decoder_layers; ++i) {
        DecoderLayer layer;
        layer.wq = xavier_uniform(d, d, rng);
        layer.wk = xavier_uniform(d, d, rng);
        layer.wv = xavier_uniform(d, d, rng);
        layer.wo = xavier_uniform(d, d, rng);
        layer.ffn = {xavier_uniform(d, h, rng), const_param(1, h, 0.0),
                     xavier_uniform(h, d, rng), const_param(1, d, 0.0)};
        decoder_.push_back(std::move(layer));
    }
    head_trend_w_ = xavier_uniform(d, 1, rng);
    head_trend_b_ = const_param(1, 1, 0.0);
    head_seasonal_w_ = xavier_uniform(d, 1, rng);
    head_seasonal_b_ = const_param(1, 1, 0.0);
    latent_w_ = xavier_uniform(d, cfg.latent_dim, rng);
    latent_b_ = const_param(1, cfg.latent_dim, 0.0);
    mu_w_ = xavier_uniform(cfg.latent_dim, cfg.latent_dim, rng);
    mu_b_ = const_param(1, cfg.latent_dim, 0.0);
    logvar_w_ = const_param(cfg.latent_dim, cfg.latent_dim, 0.0); // unit variance at init
    logvar_b_ = const_param(1, cfg.latent_dim, 0.0);
}

Tensor Model::apply_ffn(const Ffn& f, const Tensor& x) const {
    return add_rowvec(matmul(gelu(add_rowvec(matmul(x, f.w1), f.b1)), f.w2), f.b2);
}

ForwardOutput Model::forward(const Tensor& x, RngState& rng, bool training) const {
    if (!embed_w_.defined()) throw std::logic_error("Model: not initialised");
    if (x.ndim() != 2 || x.rows() != cfg_.seq_len || x.cols() != cfg_.feature_dim)
        throw std::invalid_argument("Model::forward: input must be seq_len x feature_dim");
    for (double v : x.data())
        if (!std::isfinite(v))
            throw std::invalid_argument("Model::forward: input contains non-finite values");

    const double p = cfg_.dropout_rate;
    auto drop = [&](const Tensor& t) { return dropout(t, p, rng, training); };

    Tensor emb = add_rowvec(matmul(x, embed_w_), embed_b_);
    Tensor trend = causal_moving_average(emb, cfg_.trend_window);
    Tensor seasonal = sub(emb, trend);

    for (const auto& layer : encoder_) {
        Tensor mixed = frequency_enhanced_block(seasonal, layer.filter_re, layer.filter_im,
                                                enc_freqs_);
        seasonal = add(seasonal, drop(mixed));
        seasonal = add(seasonal, drop(apply_ffn(layer.ffn, seasonal)));
    }
    Tensor enc_out = seasonal;

    Tensor trend_extrap = matmul(trend_proj_, trend); // horizon x d_model
    Tensor dec = trend_extrap;
    FreqAttentionConfig acfg;
    acfg.d_model = cfg_.d_model;
    acfg.n_heads = cfg_.n_heads;
    acfg.d_k = cfg_.d_model / cfg_.n_heads;
    acfg.modes = cfg_.modes;
    acfg.selection = cfg_.mode_selection;
    acfg.mode_seed = cfg_.mode_seed;
    for (const auto& layer : decoder_) {
        Tensor att = frequency_attention(matmul(dec, layer.wq), matmul(enc_out, layer.wk),
                                         matmul(enc_out, layer.wv), acfg);
        dec = add(dec, drop(matmul(att, layer.wo)));
        dec = add(dec, drop(apply_ffn(layer.ffn, dec)));
    }

    auto trend_head = [&](const Tensor& t) {
        return add_rowvec(matmul(t, head_trend_w_), head_trend_b_);
    };
    auto seasonal_head = [&](const Tensor& t) {
        return add_rowvec(matmul(t, head_seasonal_w_), head_seasonal_b_);
    };

    ForwardOutput out;
    out.forecast = add(trend_head(trend_extrap), seasonal_head(dec));
    out.reconstruction = add(trend_head(trend), seasonal_head(enc_out));
    out.latent = add_rowvec(matmul(enc_out, latent_w_), latent_b_);
    out.latent_mu = add_rowvec(matmul(out.latent, mu_w_), mu_b_);
    out.latent_logvar = add_rowvec(matmul(out.latent, logvar_w_), logvar_b_);
    return out;
}

std::vector<std::pair<std::string, Tensor>> Model::parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("embed.w", embed_w_);
    out.emplace_back("embed.b", embed_b_);
    for (std::size_t i = 0; i < encoder_.size(); ++i) {
        std::string base = "enc" + std::to_string(i);
        out.emplace_back(base + ".filter.re", encoder_[i].filter_re);
        out.emplace_back(base + ".filter.im", encoder_[i].filter_im);
        out.emplace_back(base + ".ffn.w1", encoder_[i].ffn.w1);
        out.emplace_back(base + ".ffn.b1", encoder_[i].ffn.b1);
        out.emplace_back(base + ".ffn.w2", encoder_[i].ffn.w2);
        out.emplace_back(base + ".ffn.b2", encoder_[i].ffn.b2);
    }
    out.emplace_back("trend_proj.w", trend_proj_);
    for (std::size_t i = 0; i < decoder_.size(); ++i) {
        std::string base = "dec" + std::to_string(i);
        out.emplace_back(base + ".attn.wq", decoder_[i].wq);
        out.emplace_back(base + ".attn.wk", decoder_[i].wk);
        out.emplace_back(base + ".attn.wv", decoder_[i].wv);
        out.emplace_back(base + ".attn.wo", decoder_[i].wo);
        out.emplace_back(base + ".ffn.w1", decoder_[i].ffn.w1);
        out.emplace_back(base + ".ffn.b1", decoder_[i].ffn.b1);
        out.emplace_back(base + ".ffn.w2", decoder_[i].ffn.w2);
        out.emplace_back(base + ".ffn.b2", decoder_[i].ffn.b2);
    }
    out.emplace_back("head.trend.w", head_trend_w_);
    out.emplace_back("head.trend.b", head_trend_b_);
    out.emplace_back("head.seasonal.w", head_seasonal_w_);
    out.emplace_back("head.seasonal.b", head_seasonal_b_);
    out.emplace_back("latent.w", latent_w_);
    out.emplace_back("latent.b", latent_b_);
    out.emplace_back("latent.mu.w", mu_w_);
    out.emplace_back("latent.mu.b", mu_b_);
    out.emplace_back("latent.logvar.w", logvar_w_);
    out.emplace_back("latent.logvar.b", logvar_b_);
    return out;
}

void Model::save(const std::string& path) const {
    Checkpoint ckpt;
    ckpt.config_json = cfg_.to_json();
    for (const auto& [name, t] : parameters()) ckpt.arrays.emplace_back(name, t.data());
    ckpt.save(path);
}

Model Model::load(const std::string& path) {
    Checkpoint ckpt = Checkpoint::load(path);
    ModelConfig cfg = ModelConfig::from_json(ckpt.config_json);
    RngState scratch(0);
    Model m(cfg, scratch);
    for (auto& [name, t] : m.parameters()) {
        const std::vector<double>* values = ckpt.find(name);
        if (!values) throw std::runtime_error("Model::load: missing parameter \"" + name + "\"");
        if (values->size() != t.size())
            throw std::runtime_error("Model::load: size mismatch for \"" + name + "\"");
        t.data() = *values;
    }
    return m;
}

Tensor latent_sample(const Tensor& mu, const Tensor& logvar, RngState& rng, bool training) {
    if (mu.shape() != logvar.shape())
        throw std::invalid_argument("latent_sample: mu and logvar shapes differ");
    if (!training) return mu;
    std::vector<double> eps(mu.size());
    for (auto& e : eps) e = rng.normal();
    Tensor noise(mu.shape(), std::move(eps), false);
    return add(mu, mul(exp_elem(scale(logvar, 0.5)), noise));
}

} // namespace freqcast
