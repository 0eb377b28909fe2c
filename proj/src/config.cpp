#include "freqcast/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace freqcast {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

double as_number(const njson& v, const std::string& path) {
    if (!v.is_number()) fail(path + " must be a number");
    return v.get<double>();
}

std::size_t as_count(const njson& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path + " must be an integer");
    if (v.is_number_integer() && v.get<long long>() < 0) fail(path + " must be non-negative");
    return v.get<std::size_t>();
}

std::uint64_t as_seed(const njson& v, const std::string& path) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path + " must be an integer");
    if (v.is_number_integer() && v.get<long long>() < 0) fail(path + " must be non-negative");
    return v.get<std::uint64_t>();
}

bool as_bool(const njson& v, const std::string& path) {
    if (!v.is_boolean()) fail(path + " must be a boolean");
    return v.get<bool>();
}

std::string as_string(const njson& v, const std::string& path) {
    if (!v.is_string()) fail(path + " must be a string");
    return v.get<std::string>();
}

void require_object(const njson& v, const std::string& path) {
    if (!v.is_object()) fail(path + " must be an object");
}

void apply_split(const njson& o, SplitRatios& split) {
    require_object(o, "data.split");
    for (const auto& [key, value] : o.items()) {
        if (key == "train") split.train = as_number(value, "data.split.train");
        else if (key == "val") split.val = as_number(value, "data.split.val");
        else if (key == "test") split.test = as_number(value, "data.split.test");
        else fail("unknown key \"data.split." + key + "\"");
    }
}

void apply_data(const njson& o, RunConfig& cfg) {
    require_object(o, "data");
    for (const auto& [key, value] : o.items()) {
        if (key == "csv") cfg.data_csv = as_string(value, "data.csv");
        else if (key == "checkpoint") cfg.checkpoint = as_string(value, "data.checkpoint");
        else if (key == "truth") cfg.truth_csv = as_string(value, "data.truth");
        else if (key == "report") cfg.report_json = as_string(value, "data.report");
        else if (key == "forecast") cfg.forecast_csv = as_string(value, "data.forecast");
        else if (key == "log_returns") cfg.features.log_returns = as_bool(value, "data.log_returns");
        else if (key == "log_volume") cfg.features.log_volume = as_bool(value, "data.log_volume");
        else if (key == "split") apply_split(value, cfg.split);
        else if (key == "stride") cfg.window_stride = as_count(value, "data.stride");
        else fail("unknown key \"data." + key + "\"");
    }
}

void apply_synth(const njson& o, SynthConfig& synth) {
    require_object(o, "synth");
    for (const auto& [key, value] : o.items()) {
        if (key == "n") synth.n = as_count(value, "synth.n");
        else if (key == "base") synth.base = as_number(value, "synth.base");
        else if (key == "trend_slope") synth.trend_slope = as_number(value, "synth.trend_slope");
        else if (key == "sinusoids") {
            if (!value.is_array()) fail("synth.sinusoids must be an array");
            synth.sinusoids.clear();
            std::size_t i = 0;
            for (const auto& s : value) {
                const std::string path = "synth.sinusoids[" + std::to_string(i) + "]";
                require_object(s, path);
                SynthSinusoid sin;
                for (const auto& [sk, sv] : s.items()) {
                    if (sk == "amplitude") sin.amplitude = as_number(sv, path + ".amplitude");
                    else if (sk == "period") sin.period = as_number(sv, path + ".period");
                    else fail("unknown key \"" + path + "." + sk + "\"");
                }
                synth.sinusoids.push_back(sin);
                ++i;
            }
        } else if (key == "noise_sigma") synth.noise_sigma = as_number(value, "synth.noise_sigma");
        else if (key == "anomaly_rate") synth.anomaly_rate = as_number(value, "synth.anomaly_rate");
        else if (key == "anomaly_magnitude") synth.anomaly_magnitude = as_number(value, "synth.anomaly_magnitude");
        else if (key == "start_date") synth.start_date = as_string(value, "synth.start_date");
        else fail("unknown key \"synth." + key + "\"");
    }
}

void apply_train(const njson& o, TrainConfig& train) {
    require_object(o, "train");
    for (const auto& [key, value] : o.items()) {
        if (key == "epochs") train.epochs = as_count(value, "train.epochs");
        else if (key == "lr0") train.lr0 = as_number(value, "train.lr0");
        else if (key == "beta1") train.beta1 = as_number(value, "train.beta1");
        else if (key == "beta2") train.beta2 = as_number(value, "train.beta2");
        else if (key == "adam_eps") train.adam_eps = as_number(value, "train.adam_eps");
        else if (key == "patience") train.patience = as_count(value, "train.patience");
        else if (key == "batch_size") train.batch_size = as_count(value, "train.batch_size");
        else if (key == "clip_norm") train.clip_norm = as_number(value, "train.clip_norm");
        else fail("unknown key \"train." + key + "\"");
    }
}

void apply_risk(const njson& o, RiskConfig& risk) {
    require_object(o, "risk");
    for (const auto& [key, value] : o.items()) {
        if (key == "hidden") {
            if (!value.is_array()) fail("risk.hidden must be an array of layer widths");
            risk.hidden.clear();
            std::size_t i = 0;
            for (const auto& h : value)
                risk.hidden.push_back(as_count(h, "risk.hidden[" + std::to_string(i++) + "]"));
        } else if (key == "aux_dim") risk.aux_dim = as_count(value, "risk.aux_dim");
        else if (key == "lambda1") risk.lambda1 = as_number(value, "risk.lambda1");
        else if (key == "lambda2") risk.lambda2 = as_number(value, "risk.lambda2");
        else if (key == "beta") risk.beta = as_number(value, "risk.beta");
        else if (key == "mode") risk.mode = risk_mode_from_name(as_string(value, "risk.mode"));
        else if (key == "label_percentile") risk.label_percentile = as_number(value, "risk.label_percentile");
        else fail("unknown key \"risk." + key + "\"");
    }
}

void apply_anomaly(const njson& o, RunConfig& cfg) {
    require_object(o, "anomaly");
    for (const auto& [key, value] : o.items()) {
        if (key == "alpha") cfg.alpha = as_number(value, "anomaly.alpha");
        else if (key == "mode") cfg.detect_mode = detect_mode_from_name(as_string(value, "anomaly.mode"));
        else if (key == "rolling_window") cfg.rolling_window = as_count(value, "anomaly.rolling_window");
        else if (key == "segment") cfg.detect_segment = as_string(value, "anomaly.segment");
        else fail("unknown key \"anomaly." + key + "\"");
    }
}

void apply_forecast(const njson& o, RunConfig& cfg) {
    require_object(o, "forecast");
    for (const auto& [key, value] : o.items()) {
        if (key == "segment") cfg.forecast_segment = as_string(value, "forecast.segment");
        else if (key == "stride") cfg.forecast_stride = as_count(value, "forecast.stride");
        else fail("unknown key \"forecast." + key + "\"");
    }
}

void check_segment(const std::string& name, const std::string& path) {
    if (name != "train" && name != "val" && name != "test" && name != "all")
        fail(path + " must be one of train, val, test, all");
}

} // namespace

std::string detect_mode_name(DetectMode mode) {
    return mode == DetectMode::global ? "global" : "rolling";
}

DetectMode detect_mode_from_name(const std::string& name) {
    if (name == "global") return DetectMode::global;
    if (name == "rolling") return DetectMode::rolling;
    throw std::invalid_argument("detect mode must be \"global\" or \"rolling\", got \"" + name + "\"");
}

std::string risk_config_to_json(const RiskConfig& cfg) {
    ojson j;
    j["hidden"] = cfg.hidden;
    j["aux_dim"] = cfg.aux_dim;
    j["lambda1"] = cfg.lambda1;
    j["lambda2"] = cfg.lambda2;
    j["beta"] = cfg.beta;
    j["mode"] = risk_mode_name(cfg.mode);
    j["label_percentile"] = cfg.label_percentile;
    return j.dump();
}

RiskConfig risk_config_from_json(const std::string& text) {
    njson j;
    try {
        j = njson::parse(text);
    } catch (const njson::exception& e) {
        throw std::invalid_argument(std::string("risk config: invalid JSON: ") + e.what());
    }
    RiskConfig cfg;
    apply_risk(j, cfg);
    return cfg;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    njson j;
    try {
        j = njson::parse(text);
    } catch (const njson::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("top level must be a JSON object");

    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "out_dir") cfg.out_dir = as_string(value, "out_dir");
        else if (key == "seed") cfg.seeds = {as_seed(value, "seed")};
        else if (key == "seeds") {
            if (!value.is_array()) fail("seeds must be an array");
            cfg.seeds.clear();
            std::size_t i = 0;
            for (const auto& s : value)
                cfg.seeds.push_back(as_seed(s, "seeds[" + std::to_string(i++) + "]"));
        } else if (key == "data") apply_data(value, cfg);
        else if (key == "synth") apply_synth(value, cfg.synth);
        else if (key == "model") {
            require_object(value, "model");
            cfg.model = ModelConfig::from_json(value.dump());
        } else if (key == "train") apply_train(value, cfg.train);
        else if (key == "risk") apply_risk(value, cfg.risk);
        else if (key == "anomaly") apply_anomaly(value, cfg);
        else if (key == "forecast") apply_forecast(value, cfg);
        else fail("unknown key \"" + key + "\"");
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string RunConfig::resolved_json() const {
    ojson j;
    j["out_dir"] = out_dir;
    j["seeds"] = seeds;
    ojson data;
    data["csv"] = data_csv;
    data["checkpoint"] = checkpoint;
    data["truth"] = truth_csv;
    data["report"] = report_json;
    data["forecast"] = forecast_csv;
    data["log_returns"] = features.log_returns;
    data["log_volume"] = features.log_volume;
    data["split"] = ojson{{"train", split.train}, {"val", split.val}, {"test", split.test}};
    data["stride"] = window_stride;
    j["data"] = data;
    ojson sy;
    sy["n"] = synth.n;
    sy["base"] = synth.base;
    sy["trend_slope"] = synth.trend_slope;
    ojson sins = ojson::array();
    for (const auto& s : synth.sinusoids)
        sins.push_back(ojson{{"amplitude", s.amplitude}, {"period", s.period}});
    sy["sinusoids"] = sins;
    sy["noise_sigma"] = synth.noise_sigma;
    sy["anomaly_rate"] = synth.anomaly_rate;
    sy["anomaly_magnitude"] = synth.anomaly_magnitude;
    sy["start_date"] = synth.start_date;
    j["synth"] = sy;
    j["model"] = ojson::parse(model.to_json());
    ojson tr;
    tr["epochs"] = train.epochs;
    tr["lr0"] = train.lr0;
    tr["beta1"] = train.beta1;
    tr["beta2"] = train.beta2;
    tr["adam_eps"] = train.adam_eps;
    tr["patience"] = train.patience;
    tr["batch_size"] = train.batch_size;
    tr["clip_norm"] = train.clip_norm;
    j["train"] = tr;
    j["risk"] = ojson::parse(risk_config_to_json(risk));
    ojson an;
    an["alpha"] = alpha;
    an["mode"] = detect_mode_name(detect_mode);
    an["rolling_window"] = rolling_window;
    an["segment"] = detect_segment;
    j["anomaly"] = an;
    ojson fc;
    fc["segment"] = forecast_segment;
    fc["stride"] = forecast_stride;
    j["forecast"] = fc;
    return j.dump(2) + "\n";
}

void RunConfig::validate() const {
    if (seeds.empty()) fail("seeds must not be empty");
    if (out_dir.empty()) fail("out_dir must not be empty");
    model.validate();
    train.validate();
    risk.validate();
    if (!(alpha > 0.0)) fail("anomaly.alpha must be positive");
    if (rolling_window == 0) fail("anomaly.rolling_window must be at least 1");
    check_segment(detect_segment, "anomaly.segment");
    check_segment(forecast_segment, "forecast.segment");
    if (window_stride == 0) fail("data.stride must be at least 1");
    const double total = split.train + split.val + split.test;
    if (!(total > 0.99 && total < 1.01)) fail("data.split ratios must sum to 1");
    if (split.train < 0 || split.val < 0 || split.test < 0) fail("data.split ratios must be non-negative");
    if (synth.n < 2) fail("synth.n must be at least 2");
    if (synth.anomaly_rate < 0 || synth.anomaly_rate > 1) fail("synth.anomaly_rate must lie in [0, 1]");
    if (synth.noise_sigma < 0) fail("synth.noise_sigma must be non-negative");
}

} // namespace freqcast
