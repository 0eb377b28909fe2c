#ifndef FREQCAST_RISK_HPP
#define FREQCAST_RISK_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "freqcast/rng.hpp"
#include "freqcast/tensor.hpp"

namespace freqcast {

enum class RiskMode { classification, regression };

std::string risk_mode_name(RiskMode mode);
RiskMode risk_mode_from_name(const std::string& name);

struct RiskConfig {
    std::vector<std::size_t> hidden{32};
    std::size_t aux_dim = 2;
    double lambda1 = 0.5;  // reconstruction weight
    double lambda2 = 0.5;  // risk-head weight
    double beta = 0.01;    // KL weight
    RiskMode mode = RiskMode::classification;
    double label_percentile = 90.0;

    void validate() const;
};

/// MLP over [pooled latent state, auxiliary stats]. Hidden layers use GELU;
/// the scalar output passes through a sigmoid in classification mode and is
/// left linear in regression mode.
class RiskHead {
  public:
    RiskHead() = default;
    RiskHead(std::size_t latent_dim, const RiskConfig& cfg, RngState& rng);

    /// pooled: 1 x latent_dim, aux: 1 x aux_dim. Returns a 1x1 score.
    Tensor forward(const Tensor& pooled, const Tensor& aux) const;

    std::vector<std::pair<std::string, Tensor>> parameters() const;
    std::size_t latent_dim() const { return latent_dim_; }
    std::size_t aux_dim() const { return aux_dim_; }
    RiskMode mode() const { return mode_; }

  private:
    struct Layer {
        Tensor w, b;
    };
    std::vector<Layer> layers_;
    std::size_t latent_dim_ = 0;
    std::size_t aux_dim_ = 0;
    RiskMode mode_ = RiskMode::classification;
};

struct LossBreakdown {
    double total = 0.0;
    double forecast = 0.0;
    double reconstruction = 0.0;
    double risk = 0.0;
    double kl = 0.0;
};

/// total = MSE(forecast) + lambda1 * L1(recon) + lambda2 * risk_term + beta * KL
/// where risk_term is binary cross-entropy in classification mode and MSE in
/// regression mode. Returns the differentiable total; the unweighted raw value
/// of each term is reported through `breakdown` (total there includes the
/// weights, so total == forecast + lambda1*recon + lambda2*risk + beta*kl).
Tensor joint_loss(const Tensor& forecast, const Tensor& forecast_target,
                  const Tensor& recon, const Tensor& recon_target,
                  const Tensor& risk_score, double risk_label,
                  const Tensor& mu, const Tensor& logvar,
                  const RiskConfig& cfg, LossBreakdown* breakdown = nullptr);

} // namespace freqcast

#endif
