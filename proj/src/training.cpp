#include "freqcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "freqcast/ops.hpp"

namespace freqcast {

void TrainConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
    if (lr0 < 0.0) throw std::invalid_argument("TrainConfig: lr0 must be >= 0");
    if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("TrainConfig: betas must be in [0, 1)");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("TrainConfig: adam_eps must be positive");
}

AdamState adam_init(const NamedParams& params) {
    AdamState state;
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const auto& [name, t] : params) {
        state.m.emplace_back(t.size(), 0.0);
        state.v.emplace_back(t.size(), 0.0);
    }
    return state;
}

void adam_step(NamedParams& params, AdamState& state, double lr, const TrainConfig& cfg) {
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state does not match parameter list");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i].second;
        const std::vector<double>* grads = p.grad_if_any();
        auto& m = state.m[i];
        auto& v = state.v[i];
        if (m.size() != p.size())
            throw std::invalid_argument("adam_step: state does not match parameter list");
        std::vector<double>& data = p.data();
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double g = grads ? (*grads)[j] : 0.0;
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            data[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        }
    }
}

double cosine_lr(std::size_t epoch, std::size_t total_epochs, double lr0) {
    if (total_epochs == 0) throw std::invalid_argument("cosine_lr: total_epochs must be positive");
    const double ratio = static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return lr0 * 0.5 * (1.0 + std::cos(M_PI * ratio));
}

double clip_gradients(NamedParams& params, double max_norm) {
    double sq = 0.0;
    for (auto& [name, t] : params) {
        const std::vector<double>* grads = t.grad_if_any();
        if (!grads) continue;
        for (double g : *grads) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto& [name, t] : params) {
            if (!t.grad_if_any()) continue;
            for (double& g : t.grad()) g *= scale;
        }
    }
    return norm;
}

std::string TrainLog::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "epoch,train_loss,val_loss,lr,forecast,reconstruction,risk,kl\n";
    for (const auto& e : epochs) {
        os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.lr << ','
           << e.forecast_term << ',' << e.recon_term << ',' << e.risk_term << ',' << e.kl_term
           << '\n';
    }
    return os.str();
}

namespace {

std::string svg_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::string& stroke, const std::string& dash) {
    std::ostringstream os;
    os.precision(6);
    os << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\"";
    if (!dash.empty()) os << " stroke-dasharray=\"" << dash << "\"";
    os << " points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) os << ' ';
        os << xs[i] << ',' << ys[i];
    }
    os << "\"/>\n";
    return os.str();
}

} // namespace

std::string TrainLog::to_svg() const {
    const double width = 800.0, height = 480.0;
    const double left = 64.0, right = 24.0, top = 28.0, bottom = 48.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& e : epochs) {
        for (double v : {e.train_loss, e.val_loss}) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        hi += 0.5;
        lo -= 0.5;
    }
    const double n = epochs.empty() ? 1.0 : static_cast<double>(epochs.size());
    auto px = [&](double epoch1) {
        return n <= 1.0 ? left + plot_w / 2.0 : left + plot_w * (epoch1 - 1.0) / (n - 1.0);
    };
    auto py = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::vector<double> tx, ty, vx, vy;
    for (const auto& e : epochs) {
        if (std::isfinite(e.train_loss)) {
            tx.push_back(px(static_cast<double>(e.epoch)));
            ty.push_back(py(e.train_loss));
        }
        if (std::isfinite(e.val_loss)) {
            vx.push_back(px(static_cast<double>(e.epoch)));
            vy.push_back(py(e.val_loss));
        }
    }

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "  <line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
       << "\" y2=\"" << top + plot_h << "\" stroke=\"#444\"/>\n";
    os << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
       << top + plot_h << "\" stroke=\"#444\"/>\n";
    os << "  <text x=\"" << left + plot_w / 2.0 << "\" y=\"" << height - 12.0
       << "\" text-anchor=\"middle\" font-size=\"14\">epoch</text>\n";
    os << "  <text x=\"16\" y=\"" << top + plot_h / 2.0
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 "
       << top + plot_h / 2.0 << ")\">loss</text>\n";
    os << "  <text x=\"" << left - 8.0 << "\" y=\"" << py(hi) + 4.0
       << "\" text-anchor=\"end\" font-size=\"12\">" << hi << "</text>\n";
    os << "  <text x=\"" << left - 8.0 << "\" y=\"" << py(lo) + 4.0
       << "\" text-anchor=\"end\" font-size=\"12\">" << lo << "</text>\n";
    os << svg_polyline(tx, ty, "#e6762b", "");
    os << svg_polyline(vx, vy, "#2b6ee6", "6 4");
    os << "  <line x1=\"" << left + plot_w - 180.0 << "\" y1=\"" << top + 10.0 << "\" x2=\""
       << left + plot_w - 150.0 << "\" y2=\"" << top + 10.0
       << "\" stroke=\"#e6762b\" stroke-width=\"2\"/>\n";
    os << "  <text x=\"" << left + plot_w - 142.0 << "\" y=\"" << top + 14.0
       << "\" font-size=\"13\">train</text>\n";
    os << "  <line x1=\"" << left + plot_w - 180.0 << "\" y1=\"" << top + 30.0 << "\" x2=\""
       << left + plot_w - 150.0 << "\" y2=\"" << top + 30.0
       << "\" stroke=\"#2b6ee6\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    os << "  <text x=\"" << left + plot_w - 142.0 << "\" y=\"" << top + 34.0
       << "\" font-size=\"13\">validation</text>\n";
    os << "</svg>\n";
    return os.str();
}

namespace {

std::vector<std::vector<double>> snapshot(const NamedParams& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const auto& [name, t] : params) out.push_back(t.data());
    return out;
}

void restore(NamedParams& params, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].second.data() = snap[i];
}

struct WindowLoss {
    Tensor loss;
    LossBreakdown breakdown;
};

WindowLoss window_loss(const Model& model, const RiskHead& risk, const WindowBundle& data,
                       const WindowRecord& rec, const RiskConfig& rcfg, RngState& rng,
                       bool training) {
    Tensor input = window_input(data, rec);
    Tensor target = window_target(data, rec);
    Tensor recon_target = window_recon_target(data, rec);
    ForwardOutput out = model.forward(input, rng, training);
    Tensor z = latent_sample(out.latent_mu, out.latent_logvar, rng, training);
    Tensor pooled = mean_rows(z);
    Tensor aux({1, 2}, {rec.aux[0], rec.aux[1]}, false);
    Tensor score = risk.forward(pooled, aux);
    const double label = rcfg.mode == RiskMode::classification
                             ? static_cast<double>(rec.risk_label)
                             : rec.horizon_vol;
    WindowLoss wl;
    wl.loss = joint_loss(out.forecast, target, out.reconstruction, recon_target, score, label,
                         out.latent_mu, out.latent_logvar, rcfg, &wl.breakdown);
    return wl;
}

} // namespace

TrainLog fit(Model& model, RiskHead& risk, const WindowBundle& data, const TrainConfig& tcfg,
             const RiskConfig& rcfg) {
    tcfg.validate();
    rcfg.validate();
    if (data.train.windows.empty())
        throw std::invalid_argument("fit: no training windows available");
    if (data.val.windows.empty())
        throw std::invalid_argument("fit: no validation windows available");

    NamedParams params = model.parameters();
    for (auto& p : risk.parameters()) params.push_back(p);
    AdamState adam = adam_init(params);
    RngState rng(tcfg.seed);

    TrainLog log;
    auto best = snapshot(params);
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::size_t since_improve = 0;

    std::vector<std::size_t> order(data.train.windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto abort_run = [&](const std::string& reason) {
        log.aborted = true;
        log.abort_reason = reason;
        restore(params, best);
        log.best_epoch = best_epoch;
        log.best_val = best_val;
    };

    {
        // Surface shape and config problems eagerly; inside the epoch loop any
        // exception is treated as numeric divergence.
        NoGradGuard guard;
        RngState probe(tcfg.seed);
        window_loss(model, risk, data, data.train.windows.front(), rcfg, probe, false);
    }

    for (std::size_t e = 0; e < tcfg.epochs; ++e) {
        const double lr = cosine_lr(e, tcfg.epochs, tcfg.lr0);
        rng.shuffle(order);

        double train_sum = 0.0;
        double val_sum = 0.0;
        LossBreakdown term_sum;
        try {
            for (std::size_t b = 0; b < order.size(); b += tcfg.batch_size) {
                const std::size_t batch_n = std::min(tcfg.batch_size, order.size() - b);
                for (auto& [name, t] : params) t.zero_grad();
                for (std::size_t k = 0; k < batch_n; ++k) {
                    const WindowRecord& rec = data.train.windows[order[b + k]];
                    WindowLoss wl = window_loss(model, risk, data, rec, rcfg, rng, true);
                    if (!std::isfinite(wl.breakdown.total)) {
                        abort_run("non-finite training loss in epoch " + std::to_string(e + 1));
                        return log;
                    }
                    backward(scale(wl.loss, 1.0 / static_cast<double>(batch_n)));
                    train_sum += wl.breakdown.total;
                    term_sum.forecast += wl.breakdown.forecast;
                    term_sum.reconstruction += wl.breakdown.reconstruction;
                    term_sum.risk += wl.breakdown.risk;
                    term_sum.kl += wl.breakdown.kl;
                }
                const double norm = clip_gradients(params, tcfg.clip_norm);
                if (!std::isfinite(norm)) {
                    abort_run("non-finite gradient norm in epoch " + std::to_string(e + 1));
                    return log;
                }
                adam_step(params, adam, lr, tcfg);
            }
            {
                NoGradGuard guard;
                for (const WindowRecord& rec : data.val.windows) {
                    WindowLoss wl = window_loss(model, risk, data, rec, rcfg, rng, false);
                    val_sum += wl.breakdown.total;
                }
            }
        } catch (const std::exception& ex) {
            abort_run("diverged in epoch " + std::to_string(e + 1) + ": " + ex.what());
            return log;
        }
        const double n_train = static_cast<double>(order.size());
        const double val_loss = val_sum / static_cast<double>(data.val.windows.size());
        if (!std::isfinite(val_loss)) {
            abort_run("non-finite validation loss in epoch " + std::to_string(e + 1));
            return log;
        }

        EpochLog el;
        el.epoch = e + 1;
        el.train_loss = train_sum / n_train;
        el.val_loss = val_loss;
        el.lr = lr;
        el.forecast_term = term_sum.forecast / n_train;
        el.recon_term = term_sum.reconstruction / n_train;
        el.risk_term = term_sum.risk / n_train;
        el.kl_term = term_sum.kl / n_train;
        log.epochs.push_back(el);

        if (val_loss < best_val) {
            best_val = val_loss;
            best_epoch = e + 1;
            best = snapshot(params);
            since_improve = 0;
        } else {
            ++since_improve;
            if (since_improve > tcfg.patience) break;
        }
    }

    restore(params, best);
    log.best_epoch = best_epoch;
    log.best_val = best_val;
    return log;
}

} // namespace freqcast
