#include "freqcast/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace freqcast {

RegressionMetrics regression_metrics(const std::vector<double>& y,
                                     const std::vector<double>& y_hat) {
    if (y.empty() || y.size() != y_hat.size()) {
        throw std::invalid_argument("regression_metrics: lengths must match and be nonzero");
    }
    RegressionMetrics m;
    m.n = y.size();
    double abs_sum = 0.0, sq_sum = 0.0, ape_sum = 0.0, y_sum = 0.0;
    std::size_t ape_n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - y_hat[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        y_sum += y[i];
        if (y[i] == 0.0) {
            ++m.mape_skipped;
        } else {
            ape_sum += std::abs(e / y[i]);
            ++ape_n;
        }
    }
    const double n = static_cast<double>(y.size());
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (ape_n == 0) {
        m.mape_defined = false;
        m.mape_pct = std::nan("");
    } else {
        m.mape_pct = 100.0 * ape_sum / static_cast<double>(ape_n);
    }
    const double mean = y_sum / n;
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - mean) * (v - mean);
    if (ss_tot == 0.0) {
        m.r2_defined = false;
        m.r2 = std::nan("");
    } else {
        m.r2 = 1.0 - sq_sum / ss_tot;
    }
    return m;
}

ClassificationMetrics classification_metrics(const std::vector<int>& labels,
                                             const std::vector<double>& scores,
                                             double threshold) {
    if (labels.empty() || labels.size() != scores.size()) {
        throw std::invalid_argument(
            "classification_metrics: lengths must match and be nonzero");
    }
    ClassificationMetrics m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw std::invalid_argument("classification_metrics: labels must be 0 or 1");
        }
        const bool predicted = scores[i] > threshold;
        if (labels[i] == 1) {
            predicted ? ++m.tp : ++m.fn;
        } else {
            predicted ? ++m.fp : ++m.tn;
        }
    }
    m.precision = m.tp + m.fp == 0
                      ? 0.0
                      : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.recall = m.tp + m.fn == 0
                   ? 0.0
                   : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);

    const std::size_t pos = m.tp + m.fn;
    const std::size_t neg = m.fp + m.tn;
    if (pos == 0 || neg == 0) {
        m.auc_defined = false;
        m.auc = std::nan("");
        return m;
    }
    // Average ranks; tied scores share the mean of their rank range, which
    // makes each tied positive/negative pair contribute exactly one half.
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t q = i; q <= j; ++q) rank[idx[q]] = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t q = 0; q < labels.size(); ++q) {
        if (labels[q] == 1) pos_rank_sum += rank[q];
    }
    const double p = static_cast<double>(pos);
    m.auc = (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
    return m;
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
}

std::string format_cell(double v) {
    if (std::isnan(v) || std::isinf(v)) return "nan";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["mae"] = number_or_null(regression.mae);
    j["rmse"] = number_or_null(regression.rmse);
    j["mape_pct"] = number_or_null(regression.mape_pct);
    j["precision"] = number_or_null(classification.precision);
    j["recall"] = number_or_null(classification.recall);
    j["f1"] = number_or_null(classification.f1);
    j["r2"] = number_or_null(regression.r2);
    j["auc"] = number_or_null(classification.auc);
    j["counts"] = {{"tp", classification.tp},
                   {"fp", classification.fp},
                   {"fn", classification.fn},
                   {"tn", classification.tn}};
    j["n"] = regression.n;
    j["mape_skipped"] = regression.mape_skipped;
    j["r2_defined"] = regression.r2_defined;
    j["auc_defined"] = classification.auc_defined;
    return j.dump(2);
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os << "mae,rmse,mape_pct,precision,recall,f1,r2,auc\n";
    os << format_cell(regression.mae) << ',' << format_cell(regression.rmse) << ','
       << format_cell(regression.mape_pct) << ',' << format_cell(classification.precision)
       << ',' << format_cell(classification.recall) << ',' << format_cell(classification.f1)
       << ',' << format_cell(regression.r2) << ',' << format_cell(classification.auc)
       << '\n';
    return os.str();
}

} // namespace freqcast
