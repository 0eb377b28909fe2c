#ifndef FREQCAST_TRAINING_HPP
#define FREQCAST_TRAINING_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "freqcast/data.hpp"
#include "freqcast/model.hpp"
#include "freqcast/risk.hpp"
#include "freqcast/tensor.hpp"

namespace freqcast {

struct TrainConfig {
    std::size_t epochs = 100;
    double lr0 = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t patience = 10;
    std::size_t batch_size = 32;
    double clip_norm = 5.0; // <= 0 disables clipping
    std::uint64_t seed = 7;

    void validate() const;
};

struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::size_t t = 0;
};

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

AdamState adam_init(const NamedParams& params);

/// One bias-corrected Adam update from the accumulated gradients. Parameters
/// without an allocated gradient are treated as having zero gradient (their
/// moment estimates still decay).
void adam_step(NamedParams& params, AdamState& state, double lr, const TrainConfig& cfg);

/// Cosine schedule: lr0 * 0.5 * (1 + cos(pi * epoch / total_epochs)).
double cosine_lr(std::size_t epoch, std::size_t total_epochs, double lr0);

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the pre-clip norm. max_norm <= 0 leaves gradients untouched.
double clip_gradients(NamedParams& params, double max_norm);

struct EpochLog {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
    double forecast_term = 0.0;
    double recon_term = 0.0;
    double risk_term = 0.0;
    double kl_term = 0.0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    std::size_t best_epoch = 0; // 1-based
    double best_val = 0.0;
    bool aborted = false;
    std::string abort_reason;

    std::string to_csv() const;
    /// Loss-curve plot with separate train and validation polylines.
    std::string to_svg() const;
};

/// Full training loop: shuffled mini-batches over the training windows,
/// cosine learning-rate schedule, validation after every epoch, early
/// stopping once validation has not improved for more than `patience`
/// consecutive epochs, and restoration of the best-validation parameters at
/// exit. Non-finite losses abort the run; the best parameters seen so far are
/// restored and the log records the reason.
TrainLog fit(Model& model, RiskHead& risk, const WindowBundle& data,
             const TrainConfig& tcfg, const RiskConfig& rcfg);

} // namespace freqcast

#endif
