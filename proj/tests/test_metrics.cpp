#include "freqcast/metrics.hpp"

#include "freqcast/rng.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace freqcast;

TEST_CASE("perfect predictions zero the error metrics") {
    const std::vector<double> y{1.0, 2.0, 3.0};
    const RegressionMetrics m = regression_metrics(y, y);
    CHECK(m.mae == doctest::Approx(0.0));
    CHECK(m.rmse == doctest::Approx(0.0));
    CHECK(m.mape_pct == doctest::Approx(0.0));
    CHECK(m.r2 == doctest::Approx(1.0));
}

TEST_CASE("hand-computed regression example") {
    const RegressionMetrics m =
        regression_metrics({1.0, 2.0, 3.0}, {2.0, 2.0, 2.0});
    CHECK(m.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("predicting the mean gives zero r2") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y_hat(4, 2.5);
    CHECK(regression_metrics(y, y_hat).r2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("constant targets make r2 undefined") {
    const RegressionMetrics m =
        regression_metrics({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0});
    CHECK_FALSE(m.r2_defined);
    CHECK(std::isnan(m.r2));
}

TEST_CASE("MAPE is in percent and skips zero targets") {
    const RegressionMetrics m =
        regression_metrics({100.0, 0.0, 200.0}, {90.0, 5.0, 220.0});
    CHECK(m.mape_skipped == 1);
    CHECK(m.mape_pct == doctest::Approx(10.0).epsilon(1e-12)); // (10%+10%)/2

    const RegressionMetrics all_zero = regression_metrics({0.0, 0.0}, {1.0, 1.0});
    CHECK_FALSE(all_zero.mape_defined);
    CHECK(all_zero.mape_skipped == 2);
}

TEST_CASE("confusion-matrix example") {
    const ClassificationMetrics m =
        classification_metrics({1, 1, 0, 0}, {1.0, 0.0, 1.0, 0.0});
    CHECK(m.tp == 1);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 1);
    CHECK(m.precision == doctest::Approx(0.5));
    CHECK(m.recall == doctest::Approx(0.5));
    CHECK(m.f1 == doctest::Approx(0.5));
}

TEST_CASE("perfect flags give perfect scores") {
    const ClassificationMetrics m =
        classification_metrics({1, 0, 1, 0}, {1.0, 0.0, 1.0, 0.0});
    CHECK(m.precision == doctest::Approx(1.0));
    CHECK(m.recall == doctest::Approx(1.0));
    CHECK(m.f1 == doctest::Approx(1.0));
    CHECK(m.auc == doctest::Approx(1.0));
}

TEST_CASE("separated scores give unit AUC and ties give one half") {
    const ClassificationMetrics sep =
        classification_metrics({1, 1, 0, 0}, {0.9, 0.8, 0.4, 0.1});
    CHECK(sep.auc == doctest::Approx(1.0));

    const ClassificationMetrics tied =
        classification_metrics({1, 0}, {0.7, 0.7});
    CHECK(tied.auc == doctest::Approx(0.5));
}

TEST_CASE("AUC matches the all-pairs oracle on random score sets") {
    RngState rng(80);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 5 + rng.below(60);
        std::vector<int> labels(n);
        std::vector<double> scores(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = rng.uniform() < 0.4 ? 1 : 0;
            (labels[i] == 1 ? has_pos : has_neg) = true;
            // Quantized scores force plenty of ties.
            scores[i] = std::floor(rng.uniform() * 8.0) / 8.0;
        }
        if (!has_pos || !has_neg) continue;
        const ClassificationMetrics m = classification_metrics(labels, scores);
        CHECK(m.auc ==
              doctest::Approx(oracles::auc_pairwise(labels, scores)).epsilon(1e-12));
    }
}

TEST_CASE("AUC is invariant under strictly monotone score transforms") {
    RngState rng(81);
    std::vector<int> labels(40);
    std::vector<double> scores(40);
    for (std::size_t i = 0; i < 40; ++i) {
        labels[i] = i % 3 == 0 ? 1 : 0;
        scores[i] = rng.uniform(-2.0, 2.0);
    }
    const double base = classification_metrics(labels, scores).auc;
    std::vector<double> transformed = scores;
    for (double& s : transformed) s = std::exp(0.7 * s) + 3.0;
    CHECK(classification_metrics(labels, transformed).auc ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("degenerate classification inputs follow the documented conventions") {
    const ClassificationMetrics no_pred =
        classification_metrics({1, 1}, {0.0, 0.0});
    CHECK(no_pred.precision == 0.0); // tp+fp == 0
    CHECK(no_pred.recall == 0.0);
    CHECK(no_pred.f1 == 0.0);
    CHECK_FALSE(no_pred.auc_defined);

    const ClassificationMetrics single_class =
        classification_metrics({0, 0, 0}, {0.2, 0.9, 0.4});
    CHECK_FALSE(single_class.auc_defined);
    CHECK(std::isnan(single_class.auc));

    CHECK_THROWS_AS(classification_metrics({2}, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(classification_metrics({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(regression_metrics({}, {}), std::invalid_argument);
}

TEST_CASE("rmse dominates mae and joint shuffles leave metrics unchanged") {
    RngState rng(82);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rng.below(100);
        const std::vector<double> y = oracles::random_vector(rng, n, -5.0, 5.0);
        const std::vector<double> y_hat = oracles::random_vector(rng, n, -5.0, 5.0);
        const RegressionMetrics m = regression_metrics(y, y_hat);
        CHECK(m.rmse >= m.mae - 1e-12);

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm);
        std::vector<double> ys(n), yhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            ys[i] = y[perm[i]];
            yhs[i] = y_hat[perm[i]];
        }
        const RegressionMetrics shuffled = regression_metrics(ys, yhs);
        CHECK(shuffled.mae == doctest::Approx(m.mae).epsilon(1e-12));
        CHECK(shuffled.rmse == doctest::Approx(m.rmse).epsilon(1e-12));
        if (m.r2_defined) {
            CHECK(shuffled.r2 == doctest::Approx(m.r2).epsilon(1e-9));
        }
    }
}

TEST_CASE("f1 equals precision when precision equals recall") {
    const ClassificationMetrics m =
        classification_metrics({1, 1, 0, 0}, {1.0, 0.0, 1.0, 0.0});
    CHECK(m.precision == doctest::Approx(m.recall));
    CHECK(m.f1 == doctest::Approx(m.precision));
}

TEST_CASE("report serialization carries the Table-style row") {
    EvalReport rep;
    rep.regression = regression_metrics({1.0, 2.0, 3.0}, {2.0, 2.0, 2.0});
    rep.classification = classification_metrics({1, 1, 0, 0}, {1.0, 0.0, 1.0, 0.0});
    const auto j = nlohmann::json::parse(rep.to_json());
    for (const char* key :
         {"mae", "rmse", "mape_pct", "precision", "recall", "f1", "r2", "auc"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["counts"]["tp"].get<int>() == 1);

    const std::string csv = rep.to_csv();
    CHECK(csv.rfind("mae,rmse,mape_pct,precision,recall,f1,r2,auc\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(std::count(csv.begin(), csv.end(), ',') == 14);
}
