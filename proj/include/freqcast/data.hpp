#ifndef FREQCAST_DATA_HPP
#define FREQCAST_DATA_HPP

#include "freqcast/tensor.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace freqcast {

struct TimeSeriesFrame {
    std::vector<std::string> dates; // ISO, strictly increasing
    std::vector<double> open, high, low, close, volume;

    std::size_t size() const { return dates.size(); }
};

struct CleaningReport {
    std::size_t rows_parsed = 0;
    std::size_t duplicates_dropped = 0;
    std::size_t cells_interpolated = 0;
    std::size_t cells_edge_filled = 0;
    std::size_t rows_rejected = 0;
    /// One human-readable line per rejected row (date + reason).
    std::vector<std::string> rejections;
};

/// Expected first line of every OHLCV CSV, byte for byte.
inline constexpr const char* kOhlcvHeader = "date,open,high,low,close,volume";

TimeSeriesFrame load_ohlcv(const std::string& path, CleaningReport* report = nullptr);
TimeSeriesFrame parse_ohlcv(std::istream& in, CleaningReport* report = nullptr);
void write_ohlcv_csv(const TimeSeriesFrame& frame, const std::string& path);

struct FeatureOptions {
    bool log_returns = false;
    bool log_volume = false;
};

/// Per-step feature rows [open, high, low, close, volume, return, range_vol].
/// The first frame row is dropped (it has no return).
struct FeatureMatrix {
    static constexpr std::size_t kWidth = 7;
    static constexpr std::size_t kCloseCol = 3;
    static constexpr std::size_t kReturnCol = 5;
    static constexpr std::size_t kVolatilityCol = 6;

    std::vector<std::string> dates;
    std::vector<double> values; // rows() x kWidth, row-major

    std::size_t rows() const { return dates.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * kWidth + c]; }
};

FeatureMatrix compute_features(const TimeSeriesFrame& frame, FeatureOptions opts = {});

/// Per-column affine map to [0,1] fit on a row range. Columns with zero
/// spread map to 0.
class MinMaxScaler {
public:
    void fit(const FeatureMatrix& features, std::size_t row_begin, std::size_t row_end);
    double transform_one(double v, std::size_t col) const;
    double inverse_one(double v, std::size_t col) const;
    std::vector<double> transform(const FeatureMatrix& features) const;
    bool fitted() const { return !min_.empty(); }
    std::size_t width() const { return min_.size(); }

    const std::vector<double>& mins() const { return min_; }
    const std::vector<double>& maxs() const { return max_; }
    void set_bounds(std::vector<double> mins, std::vector<double> maxs);

private:
    std::vector<double> min_;
    std::vector<double> max_;
};

struct SplitRatios {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

struct WindowRecord {
    std::size_t start = 0; // first feature row of the input window
    double horizon_vol = 0.0;
    int risk_label = 0;
    /// [mean scaled range-volatility over the window, last scaled return].
    std::array<double, 2> aux{0.0, 0.0};
};

struct SplitWindows {
    std::size_t row_begin = 0;
    std::size_t row_end = 0;
    std::vector<WindowRecord> windows;
};

struct WindowBundle {
    FeatureMatrix features;
    std::vector<double> scaled; // rows() x kWidth
    MinMaxScaler scaler;
    std::size_t seq_len = 0, horizon = 0, stride = 1;
    SplitWindows train, val, test;
    double risk_percentile = 90.0;
    double risk_vol_threshold = 0.0;

    double scaled_at(std::size_t r, std::size_t c) const {
        return scaled[r * FeatureMatrix::kWidth + c];
    }
};

/// Chronological split by feature rows, scaler fit on the training rows only,
/// windows laid out within each split so no window straddles a boundary.
/// Risk labels: a window is high-risk when the population std of the raw
/// returns over its horizon exceeds the given percentile (nearest-rank) of
/// the training windows' horizon volatility.
WindowBundle make_windows(FeatureMatrix features, std::size_t seq_len,
                          std::size_t horizon, std::size_t stride,
                          SplitRatios ratios, double risk_percentile = 90.0);

/// T x 7 scaled input window for a record.
Tensor window_input(const WindowBundle& bundle, const WindowRecord& rec);
/// k x 1 scaled close targets following the window.
Tensor window_target(const WindowBundle& bundle, const WindowRecord& rec);
/// T x 1 scaled close values over the window (reconstruction target).
Tensor window_recon_target(const WindowBundle& bundle, const WindowRecord& rec);

struct SynthSinusoid {
    double amplitude = 1.0;
    double period = 21.0;
};

struct SynthConfig {
    std::size_t n = 4000;
    double base = 100.0;
    double trend_slope = 0.05;
    std::vector<SynthSinusoid> sinusoids{{3.0, 21.0}, {1.5, 57.0}};
    double noise_sigma = 0.5;
    double anomaly_rate = 0.01;
    /// Additive close spike, in price units; sign is drawn per spike.
    double anomaly_magnitude = 3.0;
    std::uint64_t seed = 7;
    std::string start_date = "2015-01-01";
};

struct SynthResult {
    TimeSeriesFrame frame;
    std::vector<char> anomaly_mask; // one entry per frame row
};

/// Deterministic synthetic OHLCV series: close = base + trend + sinusoids +
/// Gaussian noise, with exactly round(rate*n) injected spikes; open/high/low
/// are derived from the spiked closes so OHLC invariants hold. Dates are
/// consecutive weekdays.
SynthResult synth_generate(const SynthConfig& cfg);

/// Next weekday strictly after an ISO date.
std::string next_weekday(const std::string& iso_date);

} // namespace freqcast

#endif
