#include "freqcast/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "freqcast/init.hpp"
#include "freqcast/ops.hpp"

namespace freqcast {

std::string risk_mode_name(RiskMode mode) {
    return mode == RiskMode::classification ? "classification" : "regression";
}

RiskMode risk_mode_from_name(const std::string& name) {
    if (name == "classification") return RiskMode::classification;
    if (name == "regression") return RiskMode::regression;
    throw std::invalid_argument("risk_mode: expected \"classification\" or \"regression\", got \"" +
                                name + "\"");
}

void RiskConfig::validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0 || beta < 0.0)
        throw std::invalid_argument("RiskConfig: loss weights must be >= 0");
    if (!(label_percentile > 0.0 && label_percentile <= 100.0))
        throw std::invalid_argument("RiskConfig: label_percentile must be in (0, 100]");
    for (std::size_t h : hidden)
        if (h == 0) throw std::invalid_argument("RiskConfig: hidden layer sizes must be positive");
}

RiskHead::RiskHead(std::size_t latent_dim, const RiskConfig& cfg, RngState& rng)
    : latent_dim_(latent_dim), aux_dim_(cfg.aux_dim), mode_(cfg.mode) {
    cfg.validate();
    if (latent_dim == 0) throw std::invalid_argument("RiskHead: latent_dim must be positive");
    std::size_t in = latent_dim + cfg.aux_dim;
    for (std::size_t h : cfg.hidden) {
        layers_.push_back({xavier_uniform(in, h, rng), const_param(1, h, 0.0)});
        in = h;
    }
    layers_.push_back({xavier_uniform(in, 1, rng), const_param(1, 1, 0.0)});
}

Tensor RiskHead::forward(const Tensor& pooled, const Tensor& aux) const {
    if (layers_.empty()) throw std::logic_error("RiskHead: not initialised");
    if (pooled.rows() != 1 || pooled.cols() != latent_dim_)
        throw std::invalid_argument("RiskHead: pooled latent must be 1 x latent_dim");
    if (aux.rows() != 1 || aux.cols() != aux_dim_)
        throw std::invalid_argument("RiskHead: aux input must be 1 x aux_dim");
    Tensor h = concat_cols({pooled, aux});
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = add_rowvec(matmul(h, layers_[i].w), layers_[i].b);
        if (i + 1 < layers_.size()) h = gelu(h);
    }
    if (mode_ == RiskMode::classification) h = sigmoid(h);
    return h;
}

std::vector<std::pair<std::string, Tensor>> RiskHead::parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        std::string base = "risk.l" + std::to_string(i);
        out.emplace_back(base + ".w", layers_[i].w);
        out.emplace_back(base + ".b", layers_[i].b);
    }
    return out;
}

Tensor joint_loss(const Tensor& forecast, const Tensor& forecast_target,
                  const Tensor& recon, const Tensor& recon_target,
                  const Tensor& risk_score, double risk_label,
                  const Tensor& mu, const Tensor& logvar,
                  const RiskConfig& cfg, LossBreakdown* breakdown) {
    cfg.validate();
    if (risk_score.size() != 1)
        throw std::invalid_argument("joint_loss: risk_score must be a single value");
    if (cfg.mode == RiskMode::classification && risk_label != 0.0 && risk_label != 1.0)
        throw std::invalid_argument("joint_loss: classification labels must be 0 or 1");

    Tensor label(risk_score.shape(), risk_label, false);
    Tensor forecast_term = mse_loss(forecast, forecast_target);
    Tensor recon_term = l1_loss(recon, recon_target);
    Tensor risk_term = cfg.mode == RiskMode::classification
                           ? bce_loss(risk_score, label)
                           : mse_loss(risk_score, label);
    Tensor kl_term = kl_gaussian(mu, logvar);

    Tensor total = add(add(forecast_term, scale(recon_term, cfg.lambda1)),
                       add(scale(risk_term, cfg.lambda2), scale(kl_term, cfg.beta)));
    if (breakdown) {
        breakdown->total = total.value();
        breakdown->forecast = forecast_term.value();
        breakdown->reconstruction = recon_term.value();
        breakdown->risk = risk_term.value();
        breakdown->kl = kl_term.value();
    }
    return total;
}

} // namespace freqcast
