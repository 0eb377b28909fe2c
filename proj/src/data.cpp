#include "freqcast/data.hpp"

#include "freqcast/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace freqcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_iso_date(const std::string& s, std::chrono::sys_days* out = nullptr) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y = 0, m = 0, d = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3) return false;
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return false;
    if (out) *out = std::chrono::sys_days{ymd};
    return true;
}

std::string format_date(std::chrono::sys_days day) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell) {
    if (cell.empty()) return kNaN;
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) return kNaN;
        return v;
    } catch (const std::exception&) {
        return kNaN;
    }
}

struct RawRow {
    std::string date;
    double v[5]; // open, high, low, close, volume
};

// Linear interpolation of interior NaN runs, nearest-value fill at the edges.
void fill_column(std::vector<RawRow>& rows, std::size_t col, CleaningReport& report) {
    const std::size_t n = rows.size();
    std::size_t first_valid = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isnan(rows[i].v[col])) {
            first_valid = i;
            break;
        }
    }
    if (first_valid == n) {
        throw std::runtime_error("load_ohlcv: a data column has no valid values");
    }
    for (std::size_t i = 0; i < first_valid; ++i) {
        rows[i].v[col] = rows[first_valid].v[col];
        ++report.cells_edge_filled;
    }
    std::size_t last_valid = first_valid;
    for (std::size_t i = first_valid + 1; i < n; ++i) {
        if (std::isnan(rows[i].v[col])) continue;
        if (i > last_valid + 1) {
            const double lo = rows[last_valid].v[col];
            const double hi = rows[i].v[col];
            const double span = static_cast<double>(i - last_valid);
            for (std::size_t j = last_valid + 1; j < i; ++j) {
                rows[j].v[col] = lo + (hi - lo) * static_cast<double>(j - last_valid) / span;
                ++report.cells_interpolated;
            }
        }
        last_valid = i;
    }
    for (std::size_t i = last_valid + 1; i < n; ++i) {
        rows[i].v[col] = rows[last_valid].v[col];
        ++report.cells_edge_filled;
    }
}

} // namespace

TimeSeriesFrame parse_ohlcv(std::istream& in, CleaningReport* report_out) {
    CleaningReport report;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("load_ohlcv: empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kOhlcvHeader) {
        throw std::runtime_error(std::string("load_ohlcv: header must be exactly '") +
                                 kOhlcvHeader + "'");
    }

    std::vector<RawRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++report.rows_parsed;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != 6) {
            ++report.rows_rejected;
            report.rejections.push_back("row '" + line + "': expected 6 columns");
            continue;
        }
        if (!parse_iso_date(cells[0])) {
            ++report.rows_rejected;
            report.rejections.push_back("row '" + line + "': invalid ISO date");
            continue;
        }
        RawRow r;
        r.date = cells[0];
        for (std::size_t c = 0; c < 5; ++c) r.v[c] = parse_cell(cells[c + 1]);
        rows.push_back(std::move(r));
    }

    // ISO dates sort chronologically as strings.
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RawRow& a, const RawRow& b) { return a.date < b.date; });
    std::vector<RawRow> unique;
    unique.reserve(rows.size());
    for (auto& r : rows) {
        if (!unique.empty() && unique.back().date == r.date) {
            ++report.duplicates_dropped;
            continue;
        }
        unique.push_back(std::move(r));
    }
    rows = std::move(unique);
    if (rows.size() < 2) {
        throw std::runtime_error("load_ohlcv: fewer than 2 valid rows");
    }

    for (std::size_t c = 0; c < 5; ++c) fill_column(rows, c, report);

    TimeSeriesFrame frame;
    for (const RawRow& r : rows) {
        const double open = r.v[0], high = r.v[1], low = r.v[2], close = r.v[3],
                     volume = r.v[4];
        const double body_hi = std::max(open, close);
        const double body_lo = std::min(open, close);
        if (low > body_lo || body_hi > high) {
            ++report.rows_rejected;
            report.rejections.push_back(r.date + ": OHLC ordering violated");
            continue;
        }
        if (volume < 0.0) {
            ++report.rows_rejected;
            report.rejections.push_back(r.date + ": negative volume");
            continue;
        }
        frame.dates.push_back(r.date);
        frame.open.push_back(open);
        frame.high.push_back(high);
        frame.low.push_back(low);
        frame.close.push_back(close);
        frame.volume.push_back(volume);
    }
    if (frame.size() < 2) {
        throw std::runtime_error("load_ohlcv: fewer than 2 valid rows after cleaning");
    }
    if (report_out) *report_out = report;
    return frame;
}

TimeSeriesFrame load_ohlcv(const std::string& path, CleaningReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_ohlcv: cannot open '" + path + "'");
    }
    return parse_ohlcv(in, report);
}

void write_ohlcv_csv(const TimeSeriesFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_ohlcv_csv: cannot open '" + path + "'");
    }
    out << kOhlcvHeader << '\n';
    out.precision(10);
    for (std::size_t i = 0; i < frame.size(); ++i) {
        out << frame.dates[i] << ',' << frame.open[i] << ',' << frame.high[i] << ','
            << frame.low[i] << ',' << frame.close[i] << ',' << frame.volume[i] << '\n';
    }
    if (!out) {
        throw std::runtime_error("write_ohlcv_csv: write failed for '" + path + "'");
    }
}

FeatureMatrix compute_features(const TimeSeriesFrame& frame, FeatureOptions opts) {
    if (frame.size() < 2) {
        throw std::invalid_argument("compute_features: need at least 2 rows");
    }
    const double two_sqrt_ln2 = 2.0 * std::sqrt(std::log(2.0));
    FeatureMatrix out;
    out.dates.assign(frame.dates.begin() + 1, frame.dates.end());
    out.values.resize((frame.size() - 1) * FeatureMatrix::kWidth);
    for (std::size_t t = 1; t < frame.size(); ++t) {
        if (frame.high[t] <= 0.0 || frame.low[t] <= 0.0) {
            throw std::invalid_argument(
                "compute_features: nonpositive high/low at " + frame.dates[t]);
        }
        const double prev_close = frame.close[t - 1];
        if (prev_close == 0.0) {
            throw std::invalid_argument(
                "compute_features: zero close at " + frame.dates[t - 1] +
                " makes the next return undefined");
        }
        const double ret = opts.log_returns
                               ? std::log(frame.close[t] / prev_close)
                               : (frame.close[t] - prev_close) / prev_close;
        const double range_vol = std::log(frame.high[t] / frame.low[t]) / two_sqrt_ln2;
        double* row = out.values.data() + (t - 1) * FeatureMatrix::kWidth;
        row[0] = frame.open[t];
        row[1] = frame.high[t];
        row[2] = frame.low[t];
        row[3] = frame.close[t];
        row[4] = opts.log_volume ? std::log1p(frame.volume[t]) : frame.volume[t];
        row[5] = ret;
        row[6] = range_vol;
    }
    return out;
}

void MinMaxScaler::fit(const FeatureMatrix& features, std::size_t row_begin,
                       std::size_t row_end) {
    if (row_begin >= row_end || row_end > features.rows()) {
        throw std::invalid_argument("scaler: empty or invalid fit range");
    }
    min_.assign(FeatureMatrix::kWidth, std::numeric_limits<double>::infinity());
    max_.assign(FeatureMatrix::kWidth, -std::numeric_limits<double>::infinity());
    for (std::size_t r = row_begin; r < row_end; ++r) {
        for (std::size_t c = 0; c < FeatureMatrix::kWidth; ++c) {
            const double v = features.at(r, c);
            min_[c] = std::min(min_[c], v);
            max_[c] = std::max(max_[c], v);
        }
    }
}

double MinMaxScaler::transform_one(double v, std::size_t col) const {
    if (col >= min_.size()) throw std::invalid_argument("scaler: column out of range");
    const double span = max_[col] - min_[col];
    if (span == 0.0) return 0.0;
    return (v - min_[col]) / span;
}

double MinMaxScaler::inverse_one(double v, std::size_t col) const {
    if (col >= min_.size()) throw std::invalid_argument("scaler: column out of range");
    const double span = max_[col] - min_[col];
    if (span == 0.0) return min_[col];
    return min_[col] + v * span;
}

std::vector<double> MinMaxScaler::transform(const FeatureMatrix& features) const {
    if (!fitted()) throw std::logic_error("scaler: transform before fit");
    std::vector<double> out(features.values.size());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        for (std::size_t c = 0; c < FeatureMatrix::kWidth; ++c) {
            out[r * FeatureMatrix::kWidth + c] = transform_one(features.at(r, c), c);
        }
    }
    return out;
}

void MinMaxScaler::set_bounds(std::vector<double> mins, std::vector<double> maxs) {
    if (mins.size() != maxs.size()) {
        throw std::invalid_argument("scaler: bounds length mismatch");
    }
    min_ = std::move(mins);
    max_ = std::move(maxs);
}

namespace {

double population_std(const double* first, std::size_t n, std::size_t stride) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += first[i * stride];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = first[i * stride] - mean;
        var += d * d;
    }
    return std::sqrt(var / static_cast<double>(n));
}

void lay_out_windows(SplitWindows& split, std::size_t seq_len, std::size_t horizon,
                     std::size_t stride) {
    const std::size_t need = seq_len + horizon;
    if (split.row_end - split.row_begin < need) return;
    for (std::size_t s = split.row_begin; s + need <= split.row_end; s += stride) {
        WindowRecord rec;
        rec.start = s;
        split.windows.push_back(rec);
    }
}

} // namespace

WindowBundle make_windows(FeatureMatrix features, std::size_t seq_len,
                          std::size_t horizon, std::size_t stride, SplitRatios ratios,
                          double risk_percentile) {
    if (seq_len == 0 || horizon == 0 || stride == 0) {
        throw std::invalid_argument("make_windows: seq_len, horizon, stride must be positive");
    }
    if (seq_len <= horizon) {
        throw std::invalid_argument("make_windows: seq_len must exceed horizon");
    }
    if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw std::invalid_argument("make_windows: split ratios must be >= 0 and sum to 1");
    }
    if (risk_percentile <= 0.0 || risk_percentile > 100.0) {
        throw std::invalid_argument("make_windows: risk percentile must be in (0, 100]");
    }

    WindowBundle bundle;
    bundle.features = std::move(features);
    bundle.seq_len = seq_len;
    bundle.horizon = horizon;
    bundle.stride = stride;
    bundle.risk_percentile = risk_percentile;

    const std::size_t n = bundle.features.rows();
    const std::size_t need = seq_len + horizon;
    const std::size_t r1 = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * ratios.train));
    const std::size_t r2 = r1 + static_cast<std::size_t>(
                                    std::floor(static_cast<double>(n) * ratios.val));
    bundle.train.row_begin = 0;
    bundle.train.row_end = r1;
    bundle.val.row_begin = r1;
    bundle.val.row_end = r2;
    bundle.test.row_begin = r2;
    bundle.test.row_end = n;

    auto require_rows = [need](const char* name, double ratio, const SplitWindows& s) {
        const std::size_t have = s.row_end - s.row_begin;
        if (ratio > 0.0 && have < need) {
            throw std::invalid_argument(
                std::string("make_windows: ") + name + " split has " +
                std::to_string(have) + " rows but needs at least " +
                std::to_string(need) + " (seq_len + horizon)");
        }
    };
    require_rows("train", ratios.train, bundle.train);
    require_rows("val", ratios.val, bundle.val);
    require_rows("test", ratios.test, bundle.test);

    if (ratios.train > 0.0) {
        bundle.scaler.fit(bundle.features, 0, r1);
    } else {
        // No training rows: fit on everything so the bundle is still usable
        // for standalone evaluation flows.
        bundle.scaler.fit(bundle.features, 0, n);
    }
    bundle.scaled = bundle.scaler.transform(bundle.features);

    lay_out_windows(bundle.train, seq_len, horizon, stride);
    lay_out_windows(bundle.val, seq_len, horizon, stride);
    lay_out_windows(bundle.test, seq_len, horizon, stride);

    auto horizon_vol = [&](const WindowRecord& rec) {
        const double* first = bundle.features.values.data() +
                              (rec.start + seq_len) * FeatureMatrix::kWidth +
                              FeatureMatrix::kReturnCol;
        return population_std(first, horizon, FeatureMatrix::kWidth);
    };
    for (SplitWindows* split : {&bundle.train, &bundle.val, &bundle.test}) {
        for (WindowRecord& rec : split->windows) {
            rec.horizon_vol = horizon_vol(rec);
            double vol_sum = 0.0;
            for (std::size_t t = 0; t < seq_len; ++t) {
                vol_sum += bundle.scaled_at(rec.start + t, FeatureMatrix::kVolatilityCol);
            }
            rec.aux[0] = vol_sum / static_cast<double>(seq_len);
            rec.aux[1] =
                bundle.scaled_at(rec.start + seq_len - 1, FeatureMatrix::kReturnCol);
        }
    }

    if (!bundle.train.windows.empty()) {
        std::vector<double> vols;
        vols.reserve(bundle.train.windows.size());
        for (const WindowRecord& rec : bundle.train.windows) {
            vols.push_back(rec.horizon_vol);
        }
        std::sort(vols.begin(), vols.end());
        const std::size_t rank = static_cast<std::size_t>(std::ceil(
            risk_percentile / 100.0 * static_cast<double>(vols.size())));
        bundle.risk_vol_threshold = vols[rank - 1];
    } else {
        bundle.risk_vol_threshold = std::numeric_limits<double>::infinity();
    }
    for (SplitWindows* split : {&bundle.train, &bundle.val, &bundle.test}) {
        for (WindowRecord& rec : split->windows) {
            rec.risk_label = rec.horizon_vol > bundle.risk_vol_threshold ? 1 : 0;
        }
    }
    return bundle;
}

Tensor window_input(const WindowBundle& bundle, const WindowRecord& rec) {
    const std::size_t w = FeatureMatrix::kWidth;
    std::vector<double> v(bundle.seq_len * w);
    std::copy_n(bundle.scaled.data() + rec.start * w, bundle.seq_len * w, v.begin());
    return Tensor({bundle.seq_len, w}, std::move(v), false);
}

Tensor window_target(const WindowBundle& bundle, const WindowRecord& rec) {
    std::vector<double> v(bundle.horizon);
    for (std::size_t i = 0; i < bundle.horizon; ++i) {
        v[i] = bundle.scaled_at(rec.start + bundle.seq_len + i, FeatureMatrix::kCloseCol);
    }
    return Tensor({bundle.horizon, 1}, std::move(v), false);
}

Tensor window_recon_target(const WindowBundle& bundle, const WindowRecord& rec) {
    std::vector<double> v(bundle.seq_len);
    for (std::size_t i = 0; i < bundle.seq_len; ++i) {
        v[i] = bundle.scaled_at(rec.start + i, FeatureMatrix::kCloseCol);
    }
    return Tensor({bundle.seq_len, 1}, std::move(v), false);
}

std::string next_weekday(const std::string& iso_date) {
    std::chrono::sys_days day;
    if (!parse_iso_date(iso_date, &day)) {
        throw std::invalid_argument("next_weekday: invalid date '" + iso_date + "'");
    }
    do {
        day += std::chrono::days{1};
    } while (std::chrono::weekday{day} == std::chrono::Saturday ||
             std::chrono::weekday{day} == std::chrono::Sunday);
    return format_date(day);
}

SynthResult synth_generate(const SynthConfig& cfg) {
    if (cfg.n < 2) throw std::invalid_argument("synth_generate: n must be at least 2");
    if (cfg.noise_sigma < 0.0) {
        throw std::invalid_argument("synth_generate: noise sigma must be >= 0");
    }
    if (cfg.anomaly_rate < 0.0 || cfg.anomaly_rate > 1.0) {
        throw std::invalid_argument("synth_generate: anomaly rate must be in [0, 1]");
    }
    for (const SynthSinusoid& s : cfg.sinusoids) {
        if (s.period <= 0.0) {
            throw std::invalid_argument("synth_generate: sinusoid period must be positive");
        }
    }
    std::chrono::sys_days start;
    if (!parse_iso_date(cfg.start_date, &start)) {
        throw std::invalid_argument("synth_generate: invalid start date");
    }

    RngState rng(cfg.seed);
    const std::size_t n = cfg.n;
    std::vector<double> close(n);
    for (std::size_t t = 0; t < n; ++t) {
        double v = cfg.base + cfg.trend_slope * static_cast<double>(t);
        for (const SynthSinusoid& s : cfg.sinusoids) {
            v += s.amplitude * std::sin(2.0 * M_PI * static_cast<double>(t) / s.period);
        }
        if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * rng.normal();
        close[t] = v;
    }

    const std::size_t n_anomalies = static_cast<std::size_t>(
        std::llround(cfg.anomaly_rate * static_cast<double>(n)));
    std::vector<char> mask(n, 0);
    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_anomalies; ++i) {
        const std::size_t j = i + rng.below(positions.size() - i);
        std::swap(positions[i], positions[j]);
        const std::size_t pos = positions[i];
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        close[pos] += sign * cfg.anomaly_magnitude;
        mask[pos] = 1;
    }

    SynthResult result;
    result.anomaly_mask = std::move(mask);
    TimeSeriesFrame& frame = result.frame;
    frame.dates.resize(n);
    frame.open.resize(n);
    frame.high.resize(n);
    frame.low.resize(n);
    frame.close = close;
    frame.volume.resize(n);

    // Intraday range padding keeps high/low strictly around the body even in
    // the noiseless case so the range volatility feature is well defined.
    const double pad_scale = 0.5 * cfg.noise_sigma + 0.05;
    std::string date = cfg.start_date;
    if (std::chrono::weekday{start} == std::chrono::Saturday ||
        std::chrono::weekday{start} == std::chrono::Sunday) {
        date = next_weekday(date);
    }
    for (std::size_t t = 0; t < n; ++t) {
        frame.dates[t] = date;
        date = next_weekday(date);
        frame.open[t] = t == 0 ? close[0] : close[t - 1];
        const double body_hi = std::max(frame.open[t], close[t]);
        const double body_lo = std::min(frame.open[t], close[t]);
        frame.high[t] = body_hi + std::abs(rng.normal()) * pad_scale + 1e-6;
        frame.low[t] = body_lo - std::abs(rng.normal()) * pad_scale - 1e-6;
        frame.volume[t] = std::max(0.0, 1e6 * (1.0 + 0.1 * rng.normal()));
    }
    return result;
}

} // namespace freqcast
