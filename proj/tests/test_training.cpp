#include "freqcast/training.hpp"

#include "freqcast/data.hpp"
#include "freqcast/model.hpp"
#include "freqcast/ops.hpp"
#include "freqcast/risk.hpp"
#include "freqcast/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

using namespace freqcast;

TEST_CASE("first adam step on a quadratic") {
    Tensor w = Tensor::scalar(1.0, true);
    NamedParams params{{"w", w}};
    AdamState state = adam_init(params);
    TrainConfig cfg;
    backward(mul(w, w));
    adam_step(params, state, 0.1, cfg);
    CHECK(w.value() == doctest::Approx(0.9).epsilon(1e-8));
    CHECK(state.t == 1);
}

TEST_CASE("zero gradients leave parameters unchanged while moments decay") {
    Tensor w = Tensor::scalar(2.5, true);
    NamedParams params{{"w", w}};
    AdamState state = adam_init(params);
    TrainConfig cfg;

    adam_step(params, state, 0.1, cfg); // fresh state, no grad
    CHECK(w.value() == 2.5);

    backward(mul(w, w));
    adam_step(params, state, 0.1, cfg);
    const double m_after = state.m[0][0];
    const double v_after = state.v[0][0];
    CHECK(m_after != 0.0);

    w.zero_grad();
    adam_step(params, state, 0.0, cfg);
    CHECK(state.m[0][0] == doctest::Approx(cfg.beta1 * m_after).epsilon(1e-12));
    CHECK(state.v[0][0] == doctest::Approx(cfg.beta2 * v_after).epsilon(1e-12));
}

TEST_CASE("cosine schedule endpoints") {
    CHECK(cosine_lr(0, 100, 1e-3) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(cosine_lr(50, 100, 1e-3) == doctest::Approx(5e-4).epsilon(1e-12));
    CHECK(cosine_lr(100, 100, 1e-3) == doctest::Approx(0.0).scale(1e-3));
    CHECK(cosine_lr(25, 100, 2.0) ==
          doctest::Approx(2.0 * 0.5 * (1.0 + std::cos(M_PI * 0.25))).epsilon(1e-12));
    CHECK_THROWS_AS(cosine_lr(0, 0, 1e-3), std::invalid_argument);
}

TEST_CASE("gradient clipping rescales the global norm") {
    Tensor a = Tensor::vector({0.0, 0.0}, true);
    Tensor b = Tensor::vector({0.0}, true);
    a.grad() = {3.0, 0.0};
    b.grad() = {4.0};
    NamedParams params{{"a", a}, {"b", b}};
    const double norm = clip_gradients(params, 2.5);
    CHECK(norm == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(a.grad()[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(b.grad()[0] == doctest::Approx(2.0).epsilon(1e-12));

    a.grad() = {0.3, 0.0};
    b.grad() = {0.4};
    CHECK(clip_gradients(params, 2.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.grad()[0] == 0.3); // under the cap, untouched

    a.grad() = {30.0, 0.0};
    b.grad() = {40.0};
    CHECK(clip_gradients(params, 0.0) == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(a.grad()[0] == 30.0); // disabled
}

namespace {

WindowBundle tiny_bundle(std::uint64_t seed = 7) {
    SynthConfig scfg;
    scfg.n = 161;
    scfg.seed = seed;
    scfg.sinusoids = {{3.0, 16.0}};
    const SynthResult s = synth_generate(scfg);
    return make_windows(compute_features(s.frame), 16, 4, 4, {0.5, 0.25, 0.25});
}

ModelConfig tiny_model_config() {
    ModelConfig cfg;
    cfg.seq_len = 16;
    cfg.horizon = 4;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.n_encoder_layers = 1;
    cfg.n_decoder_layers = 1;
    cfg.modes = 4;
    cfg.trend_window = 5;
    cfg.latent_dim = 4;
    cfg.dropout_rate = 0.1;
    return cfg;
}

RiskConfig tiny_risk_config() {
    RiskConfig cfg;
    cfg.hidden = {4};
    return cfg;
}

struct FitResult {
    Model model;
    RiskHead risk;
    TrainLog log;
};

FitResult run_fit(const TrainConfig& tcfg, std::uint64_t init_seed = 1) {
    const WindowBundle data = tiny_bundle();
    RngState rng(init_seed);
    FitResult r;
    r.model = Model(tiny_model_config(), rng);
    r.risk = RiskHead(4, tiny_risk_config(), rng);
    r.log = fit(r.model, r.risk, data, tcfg, tiny_risk_config());
    return r;
}

std::vector<std::vector<double>> param_values(const Model& m, const RiskHead& r) {
    std::vector<std::vector<double>> out;
    for (const auto& [name, t] : m.parameters()) out.push_back(t.data());
    for (const auto& [name, t] : r.parameters()) out.push_back(t.data());
    return out;
}

} // namespace

TEST_CASE("zero learning rate keeps parameters bit-identical") {
    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.lr0 = 0.0;
    tcfg.batch_size = 8;
    tcfg.patience = 100;

    const WindowBundle data = tiny_bundle();
    RngState rng(1);
    Model model(tiny_model_config(), rng);
    RiskHead risk(4, tiny_risk_config(), rng);
    const auto before = param_values(model, risk);
    const TrainLog log = fit(model, risk, data, tcfg, tiny_risk_config());
    const auto after = param_values(model, risk);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        REQUIRE(before[i].size() == after[i].size());
        for (std::size_t j = 0; j < before[i].size(); ++j) {
            std::uint64_t x, y;
            std::memcpy(&x, &before[i][j], 8);
            std::memcpy(&y, &after[i][j], 8);
            CHECK(x == y);
        }
    }
    CHECK(log.epochs.size() == 3);
}

TEST_CASE("constant validation loss trips the patience rule") {
    TrainConfig tcfg;
    tcfg.epochs = 50;
    tcfg.lr0 = 0.0; // validation loss is identical every epoch
    tcfg.patience = 1;
    const FitResult r = run_fit(tcfg);
    // epoch 1 improves on +inf; epochs 2 and 3 fail to improve; stop at 3
    CHECK(r.log.epochs.size() == 3);
    CHECK(r.log.best_epoch == 1);
    CHECK(!r.log.aborted);
}

TEST_CASE("training reduces the loss on a learnable series") {
    TrainConfig tcfg;
    tcfg.epochs = 12;
    tcfg.lr0 = 3e-3;
    tcfg.batch_size = 8;
    tcfg.patience = 12;
    const FitResult r = run_fit(tcfg);
    REQUIRE(!r.log.epochs.empty());
    CHECK(r.log.best_val < r.log.epochs.front().val_loss);
    CHECK(r.log.best_epoch >= 1);
}

TEST_CASE("fit restores the best-validation parameters") {
    TrainConfig tcfg;
    tcfg.epochs = 6;
    tcfg.lr0 = 3e-3;
    tcfg.batch_size = 8;
    tcfg.patience = 6;

    const WindowBundle data = tiny_bundle();
    RngState rng(1);
    Model model(tiny_model_config(), rng);
    RiskHead risk(4, tiny_risk_config(), rng);
    const TrainLog log = fit(model, risk, data, tcfg, tiny_risk_config());

    // Recompute the validation loss with the restored parameters; it must
    // equal the best epoch's logged value.
    double val_sum = 0.0;
    {
        NoGradGuard guard;
        RngState probe(0);
        for (const WindowRecord& rec : data.val.windows) {
            Tensor input = window_input(data, rec);
            const ForwardOutput out = model.forward(input, probe, false);
            Tensor z = latent_sample(out.latent_mu, out.latent_logvar, probe, false);
            Tensor aux({1, 2}, {rec.aux[0], rec.aux[1]}, false);
            Tensor score = risk.forward(mean_rows(z), aux);
            LossBreakdown bd;
            joint_loss(out.forecast, window_target(data, rec), out.reconstruction,
                       window_recon_target(data, rec), score,
                       static_cast<double>(rec.risk_label), out.latent_mu, out.latent_logvar,
                       tiny_risk_config(), &bd);
            val_sum += bd.total;
        }
    }
    const double val = val_sum / static_cast<double>(data.val.windows.size());
    REQUIRE(log.best_epoch >= 1);
    CHECK(val == doctest::Approx(log.epochs[log.best_epoch - 1].val_loss).epsilon(1e-12));
    CHECK(log.best_val == log.epochs[log.best_epoch - 1].val_loss);
}

TEST_CASE("fit is deterministic under a fixed seed") {
    TrainConfig tcfg;
    tcfg.epochs = 4;
    tcfg.lr0 = 1e-3;
    tcfg.batch_size = 8;
    const FitResult a = run_fit(tcfg);
    const FitResult b = run_fit(tcfg);
    CHECK(a.log.to_csv() == b.log.to_csv());
    const auto pa = param_values(a.model, a.risk);
    const auto pb = param_values(b.model, b.risk);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);
}

TEST_CASE("epoch rows balance their loss terms") {
    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.lr0 = 1e-3;
    tcfg.batch_size = 8;
    const RiskConfig rcfg = tiny_risk_config();
    const FitResult r = run_fit(tcfg);
    for (const EpochLog& e : r.log.epochs) {
        const double sum = e.forecast_term + rcfg.lambda1 * e.recon_term +
                           rcfg.lambda2 * e.risk_term + rcfg.beta * e.kl_term;
        CHECK(std::abs(e.train_loss - sum) < 1e-10);
    }
}

TEST_CASE("diverging runs abort and restore the last good parameters") {
    TrainConfig tcfg;
    tcfg.epochs = 10;
    tcfg.lr0 = 1e15;
    tcfg.clip_norm = 0.0;
    tcfg.batch_size = 64;

    const WindowBundle data = tiny_bundle();
    RngState rng(1);
    Model model(tiny_model_config(), rng);
    RiskHead risk(4, tiny_risk_config(), rng);
    const auto before = param_values(model, risk);
    const TrainLog log = fit(model, risk, data, tcfg, tiny_risk_config());
    CHECK(log.aborted);
    CHECK(!log.abort_reason.empty());
    const auto after = param_values(model, risk);
    bool restored_to_start = true;
    for (std::size_t i = 0; i < before.size(); ++i)
        if (before[i] != after[i]) restored_to_start = false;
    // No epoch ever finished, so "best" is the starting point.
    if (log.best_epoch == 0) CHECK(restored_to_start);
    for (const auto& v : after)
        for (double x : v) CHECK(std::isfinite(x));
}

TEST_CASE("fit demands training and validation windows") {
    const WindowBundle train_only =
        make_windows(compute_features(synth_generate({}).frame), 256, 24, 8, {1.0, 0.0, 0.0});
    RngState rng(1);
    ModelConfig mcfg;
    mcfg.seq_len = 256;
    mcfg.horizon = 24;
    mcfg.d_model = 8;
    mcfg.n_heads = 2;
    mcfg.latent_dim = 4;
    mcfg.modes = 8;
    Model model(mcfg, rng);
    RiskHead risk(4, tiny_risk_config(), rng);
    TrainConfig tcfg;
    CHECK_THROWS_AS(fit(model, risk, train_only, tcfg, tiny_risk_config()),
                    std::invalid_argument);
}

TEST_CASE("train log renders csv and svg with both curves") {
    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.lr0 = 1e-3;
    tcfg.batch_size = 8;
    const FitResult r = run_fit(tcfg);

    const std::string csv = r.log.to_csv();
    CHECK(csv.rfind("epoch,train_loss,val_loss,lr,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4); // header + 3 epochs

    const std::string svg = r.log.to_svg();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(std::count(svg.begin(), svg.end(), '<') > 5);
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    CHECK(polylines == 2);
    CHECK(svg.find(">train<") != std::string::npos);
    CHECK(svg.find(">validation<") != std::string::npos);
}

TEST_CASE("a retained sinusoid is reconstructed after a short training run") {
    // Close follows sin(2*pi*t/16); with 32-step windows that is bin 2, inside
    // the lowest-4 retained set.
    const std::size_t n = 240;
    TimeSeriesFrame frame;
    std::string date = "2024-01-02";
    for (std::size_t t = 0; t < n; ++t) {
        const double c = 100.0 + 5.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / 16.0);
        frame.dates.push_back(date);
        date = next_weekday(date);
        frame.open.push_back(c);
        frame.high.push_back(c + 0.5);
        frame.low.push_back(c - 0.5);
        frame.close.push_back(c);
        frame.volume.push_back(1000.0);
    }
    const WindowBundle data =
        make_windows(compute_features(frame), 32, 8, 8, {0.6, 0.2, 0.2});

    ModelConfig mcfg;
    mcfg.seq_len = 32;
    mcfg.horizon = 8;
    mcfg.d_model = 8;
    mcfg.n_heads = 2;
    mcfg.n_encoder_layers = 1;
    mcfg.n_decoder_layers = 1;
    mcfg.modes = 4;
    mcfg.trend_window = 9;
    mcfg.latent_dim = 4;
    mcfg.dropout_rate = 0.0;
    RngState rng(2);
    Model model(mcfg, rng);

    const WindowRecord& rec = data.train.windows.front();
    const Tensor input = window_input(data, rec);
    const Tensor recon_target = window_recon_target(data, rec);

    NamedParams params = model.parameters();
    AdamState adam = adam_init(params);
    TrainConfig tcfg;
    RngState fwd(3);

    auto recon_mse = [&]() {
        NoGradGuard guard;
        return mse_loss(model.forward(input, fwd, false).reconstruction, recon_target).value();
    };
    const double initial = recon_mse();
    for (int step = 0; step < 200; ++step) {
        for (auto& [name, t] : params) t.zero_grad();
        backward(mse_loss(model.forward(input, fwd, true).reconstruction, recon_target));
        clip_gradients(params, tcfg.clip_norm);
        adam_step(params, adam, 1e-2, tcfg);
    }
    const double trained = recon_mse();
    CHECK(trained < 0.1 * initial);
}
