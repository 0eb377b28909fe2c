#ifndef FREQCAST_METRICS_HPP
#define FREQCAST_METRICS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace freqcast {

struct RegressionMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    /// In percent; terms with y == 0 are skipped and counted.
    double mape_pct = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
    std::size_t mape_skipped = 0;
    /// False when y is constant (zero total variance).
    bool r2_defined = true;
    bool mape_defined = true;
};

struct ClassificationMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// Mann-Whitney rank statistic; ties count one half.
    double auc = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    /// False when the labels contain a single class.
    bool auc_defined = true;
};

struct EvalReport {
    RegressionMetrics regression;
    ClassificationMetrics classification;

    std::string to_json() const;
    /// Header + one row: mae,rmse,mape_pct,precision,recall,f1,r2,auc.
    std::string to_csv() const;
};

RegressionMetrics regression_metrics(const std::vector<double>& y,
                                     const std::vector<double>& y_hat);

/// Predicted positive iff score > threshold; AUC is computed from the raw
/// scores. Passing 0/1 flags with the default threshold reproduces plain
/// confusion-matrix metrics.
ClassificationMetrics classification_metrics(const std::vector<int>& labels,
                                             const std::vector<double>& scores,
                                             double threshold = 0.5);

} // namespace freqcast

#endif
