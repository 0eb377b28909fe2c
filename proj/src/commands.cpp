#include "freqcast/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "freqcast/anomaly.hpp"
#include "freqcast/checkpoint.hpp"
#include "freqcast/data.hpp"
#include "freqcast/metrics.hpp"
#include "freqcast/model.hpp"
#include "freqcast/ops.hpp"
#include "freqcast/rng.hpp"
#include "freqcast/training.hpp"

namespace freqcast {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kW = FeatureMatrix::kWidth;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << text;
    if (!out) throw IoError("write failed for: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

/// Config path if set, otherwise the artifact's default spot in `dir`.
std::string resolve_path(const std::string& configured, const std::string& dir,
                         const std::string& fallback_name) {
    return configured.empty() ? join_path(dir, fallback_name) : configured;
}

TimeSeriesFrame load_frame(const std::string& context, const std::string& path,
                           CleaningReport* report = nullptr) {
    if (!fs::exists(path)) throw IoError(context + ": cannot open data CSV: " + path);
    try {
        return load_ohlcv(path, report);
    } catch (const std::runtime_error& e) {
        throw ParseError(context + ": " + e.what());
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

double population_std(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

struct SegmentRows {
    std::size_t begin = 0;
    std::size_t end = 0;
};

SegmentRows segment_rows(const std::string& name, std::size_t n_rows, SplitRatios split) {
    const std::size_t r1 =
        static_cast<std::size_t>(std::floor(static_cast<double>(n_rows) * split.train));
    const std::size_t r2 =
        r1 + static_cast<std::size_t>(std::floor(static_cast<double>(n_rows) * split.val));
    if (name == "train") return {0, r1};
    if (name == "val") return {r1, r2};
    if (name == "test") return {r2, n_rows};
    if (name == "all") return {0, n_rows};
    throw std::invalid_argument("unknown segment \"" + name + "\"");
}

/// Everything a trained run needs at inference time, bundled into one file.
struct InferenceState {
    Model model;
    RiskHead risk;
    RiskConfig risk_cfg;
    MinMaxScaler scaler;
    FeatureOptions features;
    SplitRatios split;
    double risk_vol_threshold = 0.0;
};

void save_inference_checkpoint(const std::string& path, const Model& model,
                               const RiskHead& risk, const RiskConfig& rcfg,
                               const WindowBundle& bundle, FeatureOptions fopts,
                               SplitRatios split) {
    Checkpoint ck;
    ojson meta;
    meta["model"] = ojson::parse(model.config().to_json());
    meta["risk"] = ojson::parse(risk_config_to_json(rcfg));
    ojson d;
    d["log_returns"] = fopts.log_returns;
    d["log_volume"] = fopts.log_volume;
    d["split"] = ojson{{"train", split.train}, {"val", split.val}, {"test", split.test}};
    d["risk_vol_threshold"] = bundle.risk_vol_threshold;
    meta["data"] = d;
    ck.config_json = meta.dump();
    for (const auto& [name, t] : model.parameters()) ck.arrays.emplace_back("model." + name, t.data());
    for (const auto& [name, t] : risk.parameters()) ck.arrays.emplace_back(name, t.data());
    ck.arrays.emplace_back("scaler.min", bundle.scaler.mins());
    ck.arrays.emplace_back("scaler.max", bundle.scaler.maxs());
    ck.save(path);
}

InferenceState load_inference_checkpoint(const std::string& path) {
    if (!fs::exists(path)) throw IoError("checkpoint not found: " + path);
    Checkpoint ck;
    try {
        ck = Checkpoint::load(path);
    } catch (const std::runtime_error& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    ojson meta;
    try {
        meta = ojson::parse(ck.config_json);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: bad embedded config: ") + e.what());
    }
    if (!meta.contains("model") || !meta.contains("risk") || !meta.contains("data"))
        throw ParseError("checkpoint: embedded config is missing a section");

    InferenceState st;
    ModelConfig mc = ModelConfig::from_json(meta["model"].dump());
    st.risk_cfg = risk_config_from_json(meta["risk"].dump());
    const auto& d = meta["data"];
    st.features.log_returns = d.value("log_returns", false);
    st.features.log_volume = d.value("log_volume", false);
    st.split.train = d["split"].value("train", 0.7);
    st.split.val = d["split"].value("val", 0.15);
    st.split.test = d["split"].value("test", 0.15);
    st.risk_vol_threshold = d.value("risk_vol_threshold", 0.0);

    RngState scratch(0);
    st.model = Model(mc, scratch);
    st.risk = RiskHead(mc.latent_dim, st.risk_cfg, scratch);
    auto fill = [&ck](const std::string& name, Tensor t) {
        const std::vector<double>* values = ck.find(name);
        if (!values) throw ParseError("checkpoint: missing array \"" + name + "\"");
        if (values->size() != t.size())
            throw ParseError("checkpoint: size mismatch for \"" + name + "\"");
        t.data() = *values;
    };
    for (auto& [name, t] : st.model.parameters()) fill("model." + name, t);
    for (auto& [name, t] : st.risk.parameters()) fill(name, t);
    const std::vector<double>* mins = ck.find("scaler.min");
    const std::vector<double>* maxs = ck.find("scaler.max");
    if (!mins || !maxs) throw ParseError("checkpoint: missing scaler bounds");
    st.scaler.set_bounds(*mins, *maxs);
    return st;
}

Tensor scaled_window(const std::vector<double>& scaled, std::size_t start,
                     std::size_t seq_len) {
    std::vector<double> values(scaled.begin() + static_cast<std::ptrdiff_t>(start * kW),
                               scaled.begin() + static_cast<std::ptrdiff_t>((start + seq_len) * kW));
    return Tensor({seq_len, kW}, std::move(values), false);
}

struct TruthSeries {
    std::map<std::string, int> labels;
};

TruthSeries read_truth(const std::string& path) {
    if (!fs::exists(path)) throw IoError("evaluate: cannot open truth CSV: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("evaluate: cannot open truth CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("evaluate: empty truth CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,is_anomaly")
        throw ParseError("evaluate: truth header must be exactly 'date,is_anomaly'");
    TruthSeries truth;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("evaluate: truth CSV line " + std::to_string(line_no) +
                             " has no comma");
        const std::string date = line.substr(0, comma);
        const std::string flag = line.substr(comma + 1);
        if (flag != "0" && flag != "1")
            throw ParseError("evaluate: truth CSV line " + std::to_string(line_no) +
                             " label must be 0 or 1");
        truth.labels[date] = flag == "1" ? 1 : 0;
    }
    if (truth.labels.empty()) throw ParseError("evaluate: truth CSV has no rows: " + path);
    return truth;
}

struct ReportSeries {
    std::vector<std::string> dates;
    std::vector<char> flags;
    std::vector<double> res;
    double theta = 0.0;
};

ReportSeries read_report(const std::string& path) {
    if (!fs::exists(path)) throw IoError("evaluate: cannot open anomaly report: " + path);
    ojson j;
    try {
        j = ojson::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("evaluate: bad anomaly report JSON: ") + e.what());
    }
    if (!j.contains("dates") || !j.contains("flags") || !j.contains("residuals") ||
        !j.contains("theta"))
        throw ParseError("evaluate: anomaly report must carry dates, flags, residuals, theta");
    ReportSeries rep;
    rep.theta = j["theta"].get<double>();
    for (const auto& d : j["dates"]) rep.dates.push_back(d.get<std::string>());
    for (const auto& f : j["flags"]) rep.flags.push_back(f.get<bool>() ? 1 : 0);
    for (const auto& r : j["residuals"]) rep.res.push_back(r.get<double>());
    if (rep.dates.size() != rep.flags.size() || rep.dates.size() != rep.res.size())
        throw ParseError("evaluate: anomaly report arrays have mismatched lengths");
    return rep;
}

struct ForecastSeries {
    std::vector<double> actual, forecast, persistence;
};

ForecastSeries read_forecast(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("evaluate: cannot open forecast CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("evaluate: empty forecast CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "date,actual,forecast,persistence")
        throw ParseError("evaluate: forecast header must be exactly "
                         "'date,actual,forecast,persistence'");
    ForecastSeries out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string date, a, f, p;
        if (!std::getline(row, date, ',') || !std::getline(row, a, ',') ||
            !std::getline(row, f, ',') || !std::getline(row, p, ','))
            throw ParseError("evaluate: malformed forecast CSV row: " + line);
        out.actual.push_back(std::stod(a));
        out.forecast.push_back(std::stod(f));
        out.persistence.push_back(std::stod(p));
    }
    if (out.actual.empty()) throw ParseError("evaluate: forecast CSV has no rows: " + path);
    return out;
}

double rmse_of(const std::vector<double>& y, const std::vector<double>& y_hat) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    return std::sqrt(acc / static_cast<double>(y.size()));
}

} // namespace

CommandResult cmd_synth(const RunConfig& cfg, std::uint64_t seed, const std::string& dir) {
    fs::create_directories(dir);
    SynthConfig sc = cfg.synth;
    sc.seed = seed;
    SynthResult result = synth_generate(sc);

    const std::string csv_path = join_path(dir, "synthetic.csv");
    write_ohlcv_csv(result.frame, csv_path);

    std::ostringstream truth;
    truth << "date,is_anomaly\n";
    std::size_t positives = 0;
    for (std::size_t i = 0; i < result.frame.size(); ++i) {
        const bool hit = result.anomaly_mask[i] != 0;
        positives += hit ? 1 : 0;
        truth << result.frame.dates[i] << ',' << (hit ? '1' : '0') << '\n';
    }
    const std::string truth_path = join_path(dir, "truth.csv");
    write_text(truth_path, truth.str());

    CommandResult res;
    res.artifacts = {csv_path, truth_path};
    res.summary = "synth: " + std::to_string(result.frame.size()) + " rows, " +
                  std::to_string(positives) + " injected anomalies (seed " +
                  std::to_string(seed) + ")";
    return res;
}

CommandResult cmd_train(const RunConfig& cfg, std::uint64_t seed, const std::string& dir) {
    fs::create_directories(dir);
    const std::string data_path = resolve_path(cfg.data_csv, dir, "synthetic.csv");
    TimeSeriesFrame frame = load_frame("train", data_path);
    FeatureMatrix features = compute_features(frame, cfg.features);
    WindowBundle bundle = make_windows(features, cfg.model.seq_len, cfg.model.horizon,
                                       cfg.window_stride, cfg.split,
                                       cfg.risk.label_percentile);

    RngState init(seed);
    Model model(cfg.model, init);
    RiskHead risk(cfg.model.latent_dim, cfg.risk, init);
    TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    TrainLog log = fit(model, risk, bundle, tcfg, cfg.risk);

    RunConfig resolved = cfg;
    resolved.seeds = {seed};
    const std::string config_path = join_path(dir, "resolved_config.json");
    write_text(config_path, resolved.resolved_json());
    const std::string ckpt_path = join_path(dir, "checkpoint.bin");
    save_inference_checkpoint(ckpt_path, model, risk, cfg.risk, bundle, cfg.features,
                              cfg.split);
    const std::string log_path = join_path(dir, "train_log.csv");
    write_text(log_path, log.to_csv());
    const std::string svg_path = join_path(dir, "loss_curve.svg");
    write_text(svg_path, log.to_svg());

    std::ostringstream sum;
    sum << "train: " << log.epochs.size() << " epochs on " << bundle.train.windows.size()
        << " windows, best epoch " << log.best_epoch << " (val " << fmt(log.best_val) << ")";
    if (log.aborted) sum << "; aborted: " << log.abort_reason << "; best parameters restored";
    CommandResult res;
    res.artifacts = {config_path, ckpt_path, log_path, svg_path};
    res.summary = sum.str();
    return res;
}

CommandResult cmd_detect(const RunConfig& cfg, std::uint64_t seed, const std::string& dir) {
    fs::create_directories(dir);
    const std::string ckpt_path = resolve_path(cfg.checkpoint, dir, "checkpoint.bin");
    InferenceState st = load_inference_checkpoint(ckpt_path);
    const std::string data_path = resolve_path(cfg.data_csv, dir, "synthetic.csv");
    TimeSeriesFrame frame = load_frame("detect", data_path);
    FeatureMatrix features = compute_features(frame, st.features);
    const std::vector<double> scaled = st.scaler.transform(features);

    const std::size_t T = st.model.config().seq_len;
    const std::size_t k = st.model.config().horizon;
    const SegmentRows seg = segment_rows(cfg.detect_segment, features.rows(), st.split);
    // Each point is scored against out-of-window predictions, so a point
    // needs T rows of history. Earlier segments supply that history for
    // later ones; only the first T rows of the series can never be scored.
    const std::size_t first = std::max(seg.begin, T);
    if (first >= seg.end)
        throw std::invalid_argument("detect: segment \"" + cfg.detect_segment + "\" has no rows with " +
                                    std::to_string(T) + " rows of history before them");

    const std::size_t n = seg.end - first;
    std::vector<double> actual(n);
    // Every row inside the horizon of a window gets one prediction per lead;
    // the median across leads is robust to single-window artifacts (a spike
    // entering or leaving one input window cannot move the majority).
    std::vector<std::vector<double>> votes(n);
    std::ostringstream risk_csv;
    risk_csv << "window_end_date,score,label\n";
    std::size_t risk_rows = 0;

    NoGradGuard guard;
    RngState rng(seed);
    for (std::size_t t = first; t < seg.end; ++t) {
        const std::size_t start = t - T;
        Tensor x = scaled_window(scaled, start, T);
        ForwardOutput out = st.model.forward(x, rng, false);
        actual[t - first] = scaled[t * kW + FeatureMatrix::kCloseCol];
        for (std::size_t i = 0; i < k && t + i < seg.end; ++i)
            votes[t + i - first].push_back(out.forecast.at(i, 0));
        if (t + k <= seg.end) {
            Tensor pooled = mean_rows(out.latent_mu);
            double vol_sum = 0.0;
            for (std::size_t r = 0; r < T; ++r)
                vol_sum += scaled[(start + r) * kW + FeatureMatrix::kVolatilityCol];
            Tensor aux({1, 2},
                       {vol_sum / static_cast<double>(T),
                        scaled[(t - 1) * kW + FeatureMatrix::kReturnCol]},
                       false);
            const double score = st.risk.forward(pooled, aux).value();
            std::vector<double> horizon_returns;
            horizon_returns.reserve(k);
            for (std::size_t i = 0; i < k; ++i)
                horizon_returns.push_back(features.at(t + i, FeatureMatrix::kReturnCol));
            const int label = population_std(horizon_returns) > st.risk_vol_threshold ? 1 : 0;
            risk_csv << features.dates[t - 1] << ',' << fmt(score) << ',' << label << '\n';
            ++risk_rows;
        }
    }

    std::vector<double> predicted(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double>& v = votes[i];
        const std::size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + mid, v.end());
        double med = v[mid];
        if (v.size() % 2 == 0) {
            const double lower = *std::max_element(v.begin(), v.begin() + mid);
            med = 0.5 * (lower + med);
        }
        predicted[i] = med;
    }

    const std::vector<double> res = residuals(actual, predicted);
    AnomalyReport report = detect(res, cfg.alpha, cfg.detect_mode, cfg.rolling_window);

    ojson j = ojson::parse(report.to_json());
    j["alpha_warning"] = report.stats.alpha_warning;
    j["segment"] = cfg.detect_segment;
    ojson dates = ojson::array();
    for (std::size_t i = 0; i < n; ++i) dates.push_back(features.dates[first + i]);
    j["dates"] = dates;
    const std::string report_path = join_path(dir, "anomaly_report.json");
    write_text(report_path, j.dump(2) + "\n");
    const std::string risk_path = join_path(dir, "risk_series.csv");
    write_text(risk_path, risk_csv.str());

    std::size_t flagged = 0;
    for (char f : report.flags) flagged += f != 0 ? 1 : 0;
    std::ostringstream sum;
    sum << "detect: " << n << " points in segment \"" << cfg.detect_segment << "\", "
        << flagged << " flagged (" << fmt(100.0 * static_cast<double>(flagged) / static_cast<double>(n))
        << "%), theta " << fmt(report.stats.theta) << ", " << risk_rows << " risk rows";
    if (report.stats.alpha_warning) sum << "; warning: alpha outside [2, 3]";
    CommandResult out;
    out.artifacts = {report_path, risk_path};
    out.summary = sum.str();
    return out;
}

CommandResult cmd_forecast(const RunConfig& cfg, std::uint64_t seed, const std::string& dir) {
    fs::create_directories(dir);
    const std::string ckpt_path = resolve_path(cfg.checkpoint, dir, "checkpoint.bin");
    InferenceState st = load_inference_checkpoint(ckpt_path);
    const std::string data_path = resolve_path(cfg.data_csv, dir, "synthetic.csv");
    TimeSeriesFrame frame = load_frame("forecast", data_path);
    FeatureMatrix features = compute_features(frame, st.features);
    const std::vector<double> scaled = st.scaler.transform(features);

    const std::size_t T = st.model.config().seq_len;
    const std::size_t k = st.model.config().horizon;
    const std::size_t stride = cfg.forecast_stride == 0 ? k : cfg.forecast_stride;
    const SegmentRows seg = segment_rows(cfg.forecast_segment, features.rows(), st.split);
    if (seg.end - seg.begin < T + k)
        throw std::invalid_argument("forecast: segment \"" + cfg.forecast_segment + "\" has " +
                                    std::to_string(seg.end - seg.begin) +
                                    " rows but needs at least " + std::to_string(T + k));

    std::vector<char> written(seg.end - seg.begin, 0);
    std::ostringstream csv;
    csv << "date,actual,forecast,persistence\n";
    std::vector<double> col_actual, col_forecast, col_persistence;

    NoGradGuard guard;
    RngState rng(seed);
    for (std::size_t s = seg.begin; s + T + k <= seg.end; s += stride) {
        Tensor x = scaled_window(scaled, s, T);
        ForwardOutput out = st.model.forward(x, rng, false);
        const double last_close = features.at(s + T - 1, FeatureMatrix::kCloseCol);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t row = s + T + i;
            if (written[row - seg.begin]) continue;
            written[row - seg.begin] = 1;
            const double actual = features.at(row, FeatureMatrix::kCloseCol);
            const double predicted =
                st.scaler.inverse_one(out.forecast.at(i, 0), FeatureMatrix::kCloseCol);
            csv << features.dates[row] << ',' << fmt(actual) << ',' << fmt(predicted) << ','
                << fmt(last_close) << '\n';
            col_actual.push_back(actual);
            col_forecast.push_back(predicted);
            col_persistence.push_back(last_close);
        }
    }
    if (col_actual.empty())
        throw std::invalid_argument("forecast: no complete windows fit the segment");

    const std::string csv_path = join_path(dir, "forecast.csv");
    write_text(csv_path, csv.str());

    const double model_rmse = rmse_of(col_actual, col_forecast);
    const double persistence_rmse = rmse_of(col_actual, col_persistence);
    std::ostringstream sum;
    sum << "forecast: " << col_actual.size() << " rows over segment \""
        << cfg.forecast_segment << "\", rmse " << fmt(model_rmse) << " vs persistence "
        << fmt(persistence_rmse);
    if (persistence_rmse > 0.0)
        sum << " (ratio " << fmt(model_rmse / persistence_rmse) << ")";
    CommandResult out;
    out.artifacts = {csv_path};
    out.summary = sum.str();
    return out;
}

CommandResult cmd_evaluate(const RunConfig& cfg, std::uint64_t /*seed*/, const std::string& dir) {
    fs::create_directories(dir);
    const std::string truth_path = resolve_path(cfg.truth_csv, dir, "truth.csv");
    const std::string report_path = resolve_path(cfg.report_json, dir, "anomaly_report.json");
    TruthSeries truth = read_truth(truth_path);
    ReportSeries rep = read_report(report_path);

    std::vector<int> labels;
    std::vector<double> flag_scores, res_scores;
    for (std::size_t i = 0; i < rep.dates.size(); ++i) {
        auto it = truth.labels.find(rep.dates[i]);
        if (it == truth.labels.end()) continue;
        labels.push_back(it->second);
        flag_scores.push_back(rep.flags[i] != 0 ? 1.0 : 0.0);
        res_scores.push_back(rep.res[i]);
    }
    if (labels.empty())
        throw std::invalid_argument(
            "evaluate: no overlapping dates between truth and report; the two date ranges "
            "must overlap");

    EvalReport eval;
    eval.classification = classification_metrics(labels, flag_scores, 0.5);
    const ClassificationMetrics ranked = classification_metrics(labels, res_scores, 0.0);
    eval.classification.auc = ranked.auc;
    eval.classification.auc_defined = ranked.auc_defined;

    const std::string forecast_path = resolve_path(cfg.forecast_csv, dir, "forecast.csv");
    double persistence_rmse = std::numeric_limits<double>::quiet_NaN();
    bool have_forecast = fs::exists(forecast_path);
    if (have_forecast) {
        ForecastSeries fc = read_forecast(forecast_path);
        eval.regression = regression_metrics(fc.actual, fc.forecast);
        persistence_rmse = rmse_of(fc.actual, fc.persistence);
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        eval.regression.mae = nan;
        eval.regression.rmse = nan;
        eval.regression.mape_pct = nan;
        eval.regression.r2 = nan;
        eval.regression.r2_defined = false;
        eval.regression.mape_defined = false;
    }

    const std::string json_path = join_path(dir, "eval_report.json");
    write_text(json_path, eval.to_json() + "\n");
    const std::string csv_path = join_path(dir, "eval_report.csv");
    write_text(csv_path, eval.to_csv());

    std::ostringstream sum;
    sum << "evaluate: " << labels.size() << " matched dates, precision "
        << fmt(eval.classification.precision) << ", recall " << fmt(eval.classification.recall)
        << ", f1 " << fmt(eval.classification.f1) << ", auc " << fmt(eval.classification.auc);
    if (have_forecast) {
        sum << "; forecast rmse " << fmt(eval.regression.rmse) << " vs persistence "
            << fmt(persistence_rmse);
        if (persistence_rmse > 0.0)
            sum << " (ratio " << fmt(eval.regression.rmse / persistence_rmse) << ")";
    } else {
        sum << "; no forecast CSV, regression metrics left empty";
    }
    CommandResult out;
    out.artifacts = {json_path, csv_path};
    out.summary = sum.str();
    return out;
}

CommandResult cmd_report(const RunConfig& cfg) {
    if (!fs::exists(cfg.out_dir)) throw IoError("report: no such directory: " + cfg.out_dir);
    std::vector<std::pair<std::uint64_t, std::string>> found;
    for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
        if (!entry.is_directory()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("seed_", 0) != 0) continue;
        const std::string report = (entry.path() / "eval_report.json").string();
        if (!fs::exists(report)) continue;
        found.emplace_back(std::stoull(name.substr(5)), report);
    }
    std::sort(found.begin(), found.end());
    if (found.empty() && fs::exists(join_path(cfg.out_dir, "eval_report.json")))
        found.emplace_back(cfg.seeds.front(), join_path(cfg.out_dir, "eval_report.json"));
    if (found.empty())
        throw IoError("report: no eval_report.json found under " + cfg.out_dir);

    static const char* kMetrics[] = {"mae",       "rmse",   "mape_pct", "precision",
                                     "recall",    "f1",     "r2",       "auc"};
    std::map<std::string, std::vector<double>> columns;
    std::vector<std::uint64_t> seeds;
    for (const auto& [seed, path] : found) {
        seeds.push_back(seed);
        ojson j;
        try {
            j = ojson::parse(read_text(path));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("report: bad eval report " + path + ": " + e.what());
        }
        for (const char* m : kMetrics) {
            if (j.contains(m) && j[m].is_number()) columns[m].push_back(j[m].get<double>());
        }
    }

    ojson agg;
    agg["seeds"] = seeds;
    agg["n_runs"] = seeds.size();
    ojson metrics;
    std::ostringstream csv;
    csv << "metric,mean,std,n\n";
    for (const char* m : kMetrics) {
        const std::vector<double>& v = columns[m];
        if (v.empty()) {
            metrics[m] = nullptr;
            csv << m << ",nan,nan,0\n";
            continue;
        }
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        const double sd = population_std(v);
        metrics[m] = ojson{{"mean", mean}, {"std", sd}, {"n", v.size()}};
        csv << m << ',' << fmt(mean) << ',' << fmt(sd) << ',' << v.size() << '\n';
    }
    agg["metrics"] = metrics;

    const std::string json_path = join_path(cfg.out_dir, "aggregate.json");
    write_text(json_path, agg.dump(2) + "\n");
    const std::string csv_path = join_path(cfg.out_dir, "aggregate.csv");
    write_text(csv_path, csv.str());

    CommandResult out;
    out.artifacts = {json_path, csv_path};
    out.summary = "report: aggregated " + std::to_string(seeds.size()) + " eval report(s)";
    return out;
}

CommandResult run_command(const RunConfig& cfg, const std::string& command) {
    cfg.validate();
    CommandResult (*fn)(const RunConfig&, std::uint64_t, const std::string&) = nullptr;
    if (command == "synth") fn = cmd_synth;
    else if (command == "train") fn = cmd_train;
    else if (command == "detect") fn = cmd_detect;
    else if (command == "forecast") fn = cmd_forecast;
    else if (command == "evaluate") fn = cmd_evaluate;
    else if (command == "report") return cmd_report(cfg);
    else
        throw std::invalid_argument("unknown command \"" + command +
                                    "\"; expected synth, train, detect, forecast, evaluate "
                                    "or report");

    if (cfg.seeds.size() == 1) return fn(cfg, cfg.seeds.front(), cfg.out_dir);

    CommandResult all;
    std::ostringstream sum;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        const std::uint64_t seed = cfg.seeds[i];
        const std::string dir = join_path(cfg.out_dir, "seed_" + std::to_string(seed));
        CommandResult one = fn(cfg, seed, dir);
        all.artifacts.insert(all.artifacts.end(), one.artifacts.begin(), one.artifacts.end());
        if (i > 0) sum << '\n';
        sum << "[seed " << seed << "] " << one.summary;
    }
    if (command == "evaluate") {
        CommandResult agg = cmd_report(cfg);
        all.artifacts.insert(all.artifacts.end(), agg.artifacts.begin(), agg.artifacts.end());
        sum << '\n' << agg.summary;
    }
    all.summary = sum.str();
    return all;
}

} // namespace freqcast
