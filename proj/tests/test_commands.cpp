#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "freqcast/commands.hpp"
#include "freqcast/config.hpp"

using namespace freqcast;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fresh_dir(const std::string& name) {
    const std::string dir = (fs::temp_directory_path() / name).string();
    fs::remove_all(dir);
    return dir;
}

RunConfig toy_config(const std::string& out) {
    RunConfig cfg;
    cfg.out_dir = out;
    cfg.seeds = {7};
    cfg.synth.n = 320;
    cfg.synth.sinusoids = {{3.0, 16.0}};
    cfg.synth.noise_sigma = 0.3;
    cfg.synth.anomaly_rate = 0.02;
    cfg.synth.anomaly_magnitude = 1.8;
    cfg.model.seq_len = 16;
    cfg.model.horizon = 4;
    cfg.model.d_model = 8;
    cfg.model.n_heads = 2;
    cfg.model.n_encoder_layers = 1;
    cfg.model.n_decoder_layers = 1;
    cfg.model.modes = 4;
    cfg.model.trend_window = 5;
    cfg.model.latent_dim = 4;
    cfg.train.epochs = 8;
    cfg.train.lr0 = 3e-3;
    cfg.train.batch_size = 16;
    cfg.train.patience = 8;
    cfg.risk.hidden = {4};
    cfg.window_stride = 4;
    cfg.split = {0.5, 0.25, 0.25};
    cfg.detect_segment = "train";
    return cfg;
}

/// One fully trained toy pipeline, shared across the read-only cases below.
const std::string& chain_dir() {
    static const std::string dir = [] {
        const std::string d = fresh_dir("fqc_cmd_chain");
        RunConfig cfg = toy_config(d);
        run_command(cfg, "synth");
        run_command(cfg, "train");
        run_command(cfg, "detect");
        run_command(cfg, "forecast");
        run_command(cfg, "evaluate");
        return d;
    }();
    return dir;
}

void write_file(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

/// Truth + matching anomaly report where exactly the labelled dates are
/// flagged, with separable residual scores.
void write_fake_eval_inputs(const std::string& dir, const std::vector<int>& labels,
                            const std::vector<int>& flags) {
    std::ostringstream truth;
    truth << "date,is_anomaly\n";
    nlohmann::ordered_json dates = nlohmann::ordered_json::array();
    nlohmann::ordered_json jflags = nlohmann::ordered_json::array();
    nlohmann::ordered_json res = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::ostringstream date;
        date << "2020-01-" << (i + 10);
        truth << date.str() << ',' << labels[i] << '\n';
        dates.push_back(date.str());
        jflags.push_back(flags[i] != 0);
        res.push_back(flags[i] != 0 ? 5.0 : 1.0);
    }
    nlohmann::ordered_json rep;
    rep["theta"] = 2.5;
    rep["dates"] = dates;
    rep["flags"] = jflags;
    rep["residuals"] = res;
    write_file(dir + "/truth.csv", truth.str());
    write_file(dir + "/anomaly_report.json", rep.dump(2));
}

} // namespace

TEST_CASE("run config parsing applies defaults and rejects unknown keys") {
    const RunConfig defaults = RunConfig::from_json_text("{}");
    CHECK(defaults.out_dir == "out");
    CHECK(defaults.seeds == std::vector<std::uint64_t>{7});
    CHECK(defaults.model.seq_len == 256);
    CHECK(defaults.alpha == 2.5);
    CHECK(defaults.detect_mode == DetectMode::global);
    CHECK(defaults.window_stride == 1);

    const RunConfig cfg = RunConfig::from_json_text(R"({
        "out_dir": "runs/a",
        "seeds": [1, 2, 3],
        "data": {"csv": "x.csv", "log_returns": true, "split": {"train": 0.6, "val": 0.2, "test": 0.2}, "stride": 3},
        "synth": {"n": 500, "sinusoids": [{"amplitude": 2.0, "period": 10.0}]},
        "model": {"seq_len": 32, "horizon": 8, "d_model": 16, "modes": 4},
        "train": {"epochs": 5, "lr0": 0.01},
        "risk": {"hidden": [8, 4], "mode": "regression"},
        "anomaly": {"alpha": 3.0, "mode": "rolling", "rolling_window": 30, "segment": "val"},
        "forecast": {"segment": "all", "stride": 2}
    })");
    CHECK(cfg.out_dir == "runs/a");
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cfg.data_csv == "x.csv");
    CHECK(cfg.features.log_returns);
    CHECK(cfg.split.train == 0.6);
    CHECK(cfg.window_stride == 3);
    CHECK(cfg.synth.n == 500);
    CHECK(cfg.synth.sinusoids.size() == 1);
    CHECK(cfg.synth.sinusoids[0].period == 10.0);
    CHECK(cfg.model.seq_len == 32);
    CHECK(cfg.model.modes == 4);
    CHECK(cfg.train.epochs == 5);
    CHECK(cfg.risk.hidden == std::vector<std::size_t>{8, 4});
    CHECK(cfg.risk.mode == RiskMode::regression);
    CHECK(cfg.alpha == 3.0);
    CHECK(cfg.detect_mode == DetectMode::rolling);
    CHECK(cfg.rolling_window == 30);
    CHECK(cfg.detect_segment == "val");
    CHECK(cfg.forecast_segment == "all");
    CHECK(cfg.forecast_stride == 2);

    CHECK(RunConfig::from_json_text(R"({"seed": 3})").seeds == std::vector<std::uint64_t>{3});

    CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"outdir": "x"})"),
                         doctest::Contains("outdir"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"data": {"strid": 2}})"),
                         doctest::Contains("data.strid"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"model": {"d_moddel": 8}})"),
                         doctest::Contains("d_moddel"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"anomaly": {"rolling": 5}})"),
                         doctest::Contains("anomaly.rolling"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"anomaly": {"mode": "weird"}})"),
                    std::invalid_argument);
    CHECK_THROWS_WITH_AS(RunConfig::from_json_text(R"({"train": {"lr0": "fast"}})"),
                         doctest::Contains("train.lr0"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"seeds": []})"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text("not json"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"anomaly": {"alpha": 0.0}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        RunConfig::from_json_text(R"({"data": {"split": {"train": 0.9, "val": 0.3, "test": 0.3}}})"),
        std::invalid_argument);
}

TEST_CASE("resolved config materializes every default and round trips") {
    RunConfig cfg;
    const std::string text = cfg.resolved_json();
    CHECK(text.find("\"seq_len\": 256") != std::string::npos);
    CHECK(text.find("\"mode_selection\": \"lowest\"") != std::string::npos);
    CHECK(text.find("\"alpha\": 2.5") != std::string::npos);
    CHECK(text.find("\"label_percentile\": 90.0") != std::string::npos);

    const RunConfig reparsed = RunConfig::from_json_text(text);
    CHECK(reparsed.resolved_json() == text);

    RunConfig tweaked = toy_config("somewhere");
    const RunConfig back = RunConfig::from_json_text(tweaked.resolved_json());
    CHECK(back.resolved_json() == tweaked.resolved_json());
    CHECK(back.model.seq_len == 16);
    CHECK(back.synth.anomaly_magnitude == 1.8);
}

TEST_CASE("synthetic generation is deterministic and creates the output tree") {
    RunConfig cfg;
    cfg.out_dir = fresh_dir("fqc_cmd_synth") + "/deep/nested";
    const CommandResult r1 = run_command(cfg, "synth");
    REQUIRE(r1.artifacts.size() == 2);
    REQUIRE(fs::exists(cfg.out_dir + "/synthetic.csv"));
    REQUIRE(fs::exists(cfg.out_dir + "/truth.csv"));

    const std::string truth = read_file(cfg.out_dir + "/truth.csv");
    CHECK(truth.rfind("date,is_anomaly\n", 0) == 0);
    std::size_t positives = 0, rows = 0;
    std::istringstream lines(truth);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        ++rows;
        if (line.size() > 2 && line.substr(line.size() - 2) == ",1") ++positives;
    }
    CHECK(rows == 4000);
    CHECK(positives == 40);

    RunConfig again = cfg;
    again.out_dir = fresh_dir("fqc_cmd_synth_b");
    run_command(again, "synth");
    CHECK(read_file(cfg.out_dir + "/synthetic.csv") ==
          read_file(again.out_dir + "/synthetic.csv"));
    CHECK(truth == read_file(again.out_dir + "/truth.csv"));

    RunConfig other = cfg;
    other.out_dir = fresh_dir("fqc_cmd_synth_c");
    other.seeds = {8};
    run_command(other, "synth");
    CHECK(read_file(cfg.out_dir + "/synthetic.csv") !=
          read_file(other.out_dir + "/synthetic.csv"));
}

TEST_CASE("the training command writes its artifacts and reruns bit-identically") {
    const std::string& dir = chain_dir();
    REQUIRE(fs::exists(dir + "/resolved_config.json"));
    REQUIRE(fs::exists(dir + "/checkpoint.bin"));
    REQUIRE(fs::exists(dir + "/train_log.csv"));
    REQUIRE(fs::exists(dir + "/loss_curve.svg"));

    CHECK(read_file(dir + "/train_log.csv")
              .rfind("epoch,train_loss,val_loss,lr,forecast,reconstruction,risk,kl\n", 0) == 0);
    const auto resolved = nlohmann::json::parse(read_file(dir + "/resolved_config.json"));
    CHECK(resolved["seeds"] == nlohmann::json::array({7}));
    CHECK(resolved["model"]["seq_len"] == 16);

    const std::string d2 = fresh_dir("fqc_cmd_train_rerun");
    RunConfig cfg = toy_config(d2);
    run_command(cfg, "synth");
    run_command(cfg, "train");
    CHECK(read_file(dir + "/checkpoint.bin") == read_file(d2 + "/checkpoint.bin"));
    CHECK(read_file(dir + "/train_log.csv") == read_file(d2 + "/train_log.csv"));
}

TEST_CASE("training rejects an unreadable data path by name") {
    RunConfig cfg = toy_config(fresh_dir("fqc_cmd_badcsv"));
    cfg.data_csv = "/nonexistent/nope.csv";
    CHECK_THROWS_WITH_AS(run_command(cfg, "train"), doctest::Contains("nope.csv"), IoError);
}

TEST_CASE("detection stays calm on training data and respects the alpha ordering") {
    const std::string& dir = chain_dir();
    const auto report = nlohmann::json::parse(read_file(dir + "/anomaly_report.json"));
    REQUIRE(report.contains("flags"));
    REQUIRE(report.contains("dates"));
    REQUIRE(report["flags"].size() == report["dates"].size());
    CHECK(report["segment"] == "train");

    std::size_t flagged = 0;
    for (const auto& f : report["flags"]) flagged += f.get<bool>() ? 1 : 0;
    const double rate = static_cast<double>(flagged) / report["flags"].size();
    CHECK(rate >= 0.0);
    CHECK(rate <= 0.10);

    RunConfig loose = toy_config(fresh_dir("fqc_cmd_alpha2"));
    loose.checkpoint = dir + "/checkpoint.bin";
    loose.data_csv = dir + "/synthetic.csv";
    loose.alpha = 2.0;
    run_command(loose, "detect");
    RunConfig strict = loose;
    strict.out_dir = fresh_dir("fqc_cmd_alpha3");
    strict.alpha = 3.0;
    run_command(strict, "detect");

    const auto at2 = nlohmann::json::parse(read_file(loose.out_dir + "/anomaly_report.json"));
    const auto at3 = nlohmann::json::parse(read_file(strict.out_dir + "/anomaly_report.json"));
    REQUIRE(at2["flags"].size() == at3["flags"].size());
    std::size_t n2 = 0, n3 = 0;
    for (std::size_t i = 0; i < at2["flags"].size(); ++i) {
        const bool f2 = at2["flags"][i].get<bool>();
        const bool f3 = at3["flags"][i].get<bool>();
        n2 += f2 ? 1 : 0;
        n3 += f3 ? 1 : 0;
        if (f3) CHECK(f2); // every strict flag must also appear at the looser alpha
    }
    CHECK(n3 <= n2);
}

TEST_CASE("the risk series covers full-horizon windows with bounded scores") {
    const std::string& dir = chain_dir();
    std::istringstream csv(read_file(dir + "/risk_series.csv"));
    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(line == "window_end_date,score,label");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream row(line);
        std::string date, score, label;
        REQUIRE(std::getline(row, date, ','));
        REQUIRE(std::getline(row, score, ','));
        REQUIRE(std::getline(row, label, ','));
        const double s = std::stod(score);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
        CHECK((label == "0" || label == "1"));
    }
    CHECK(rows >= 1);
}

TEST_CASE("detection requires the checkpoint it was pointed at") {
    RunConfig cfg = toy_config(fresh_dir("fqc_cmd_nockpt"));
    CHECK_THROWS_WITH_AS(run_command(cfg, "detect"), doctest::Contains("checkpoint"), IoError);
}

TEST_CASE("forecasting emits raw-unit rows with the persistence baseline") {
    const std::string& dir = chain_dir();
    std::istringstream csv(read_file(dir + "/forecast.csv"));
    std::string line;
    REQUIRE(std::getline(csv, line));
    CHECK(line == "date,actual,forecast,persistence");
    std::vector<double> actual, forecast, persistence;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string date, a, f, p;
        REQUIRE(std::getline(row, date, ','));
        REQUIRE(std::getline(row, a, ','));
        REQUIRE(std::getline(row, f, ','));
        REQUIRE(std::getline(row, p, ','));
        actual.push_back(std::stod(a));
        forecast.push_back(std::stod(f));
        persistence.push_back(std::stod(p));
    }
    const std::size_t k = 4;
    REQUIRE(actual.size() >= 2 * k);
    CHECK(actual.size() % k == 0);
    for (std::size_t i = 0; i < actual.size(); ++i) {
        CHECK(std::isfinite(forecast[i]));
        CHECK(actual[i] > 0.0);
        // whole horizon blocks share one origin; later blocks anchor on the
        // final actual of the previous block
        CHECK(persistence[i] == persistence[i - i % k]);
        if (i % k == 0 && i > 0) CHECK(persistence[i] == doctest::Approx(actual[i - 1]).epsilon(1e-9));
    }
}

TEST_CASE("evaluation scores the report against the truth series") {
    const std::string dir = fresh_dir("fqc_cmd_eval_perfect");
    write_fake_eval_inputs(dir, {1, 0, 0, 1, 0, 0, 1, 0}, {1, 0, 0, 1, 0, 0, 1, 0});
    RunConfig cfg = toy_config(dir);
    const CommandResult r = run_command(cfg, "evaluate");
    REQUIRE(r.artifacts.size() == 2);

    const auto rep = nlohmann::json::parse(read_file(dir + "/eval_report.json"));
    CHECK(rep["f1"] == 1.0);
    CHECK(rep["precision"] == 1.0);
    CHECK(rep["recall"] == 1.0);
    CHECK(rep["auc"] == 1.0);
    CHECK(rep["mae"].is_null()); // no forecast CSV in this directory
    CHECK(rep["counts"]["tp"] == 3);
    CHECK(rep["counts"]["tn"] == 5);

    std::istringstream csv(read_file(dir + "/eval_report.csv"));
    std::string header, row;
    REQUIRE(std::getline(csv, header));
    CHECK(header == "mae,rmse,mape_pct,precision,recall,f1,r2,auc");
    REQUIRE(std::getline(csv, row));
    std::size_t columns = 1;
    for (char c : row) columns += c == ',' ? 1 : 0;
    CHECK(columns == 8);
}

TEST_CASE("evaluating the trained chain against flags-as-truth yields a perfect F1") {
    const std::string& dir = chain_dir();
    const auto report = nlohmann::json::parse(read_file(dir + "/anomaly_report.json"));
    std::ostringstream truth;
    truth << "date,is_anomaly\n";
    for (std::size_t i = 0; i < report["dates"].size(); ++i)
        truth << report["dates"][i].get<std::string>() << ','
              << (report["flags"][i].get<bool>() ? 1 : 0) << '\n';
    const std::string dir2 = fresh_dir("fqc_cmd_eval_selftruth");
    write_file(dir2 + "/truth.csv", truth.str());

    RunConfig cfg = toy_config(dir2);
    cfg.report_json = dir + "/anomaly_report.json";
    run_command(cfg, "evaluate");
    const auto rep = nlohmann::json::parse(read_file(dir2 + "/eval_report.json"));
    CHECK(rep["f1"] == 1.0);
}

TEST_CASE("evaluation demands overlapping dates and a readable truth file") {
    const std::string dir = fresh_dir("fqc_cmd_eval_disjoint");
    write_fake_eval_inputs(dir, {1, 0, 0, 1}, {1, 0, 0, 1});
    std::ostringstream other;
    other << "date,is_anomaly\n";
    for (int i = 0; i < 4; ++i) other << "1999-05-1" << i << ",0\n";
    write_file(dir + "/truth.csv", other.str());
    RunConfig cfg = toy_config(dir);
    CHECK_THROWS_WITH_AS(run_command(cfg, "evaluate"), doctest::Contains("overlap"),
                         std::invalid_argument);

    RunConfig missing = toy_config(fresh_dir("fqc_cmd_eval_missing"));
    CHECK_THROWS_WITH_AS(run_command(missing, "evaluate"), doctest::Contains("truth"), IoError);
}

TEST_CASE("multi-seed runs fan out per seed and aggregate the evaluation") {
    RunConfig cfg;
    cfg.out_dir = fresh_dir("fqc_cmd_multi");
    cfg.seeds = {3, 5};
    run_command(cfg, "synth");
    REQUIRE(fs::exists(cfg.out_dir + "/seed_3/synthetic.csv"));
    REQUIRE(fs::exists(cfg.out_dir + "/seed_5/synthetic.csv"));
    CHECK(read_file(cfg.out_dir + "/seed_3/synthetic.csv") !=
          read_file(cfg.out_dir + "/seed_5/synthetic.csv"));

    // seed 3 scores perfectly, seed 5 misses one of two positives (F1 = 2/3)
    write_fake_eval_inputs(cfg.out_dir + "/seed_3", {1, 1, 0, 0}, {1, 1, 0, 0});
    write_fake_eval_inputs(cfg.out_dir + "/seed_5", {1, 1, 0, 0}, {1, 0, 0, 0});
    const CommandResult r = run_command(cfg, "evaluate");
    REQUIRE(fs::exists(cfg.out_dir + "/seed_3/eval_report.json"));
    REQUIRE(fs::exists(cfg.out_dir + "/seed_5/eval_report.json"));
    REQUIRE(fs::exists(cfg.out_dir + "/aggregate.json"));
    REQUIRE(fs::exists(cfg.out_dir + "/aggregate.csv"));

    const auto agg = nlohmann::json::parse(read_file(cfg.out_dir + "/aggregate.json"));
    CHECK(agg["n_runs"] == 2);
    CHECK(agg["seeds"] == nlohmann::json::array({3, 5}));
    const double mean_f1 = agg["metrics"]["f1"]["mean"].get<double>();
    const double expected = (1.0 + 2.0 / 3.0) / 2.0;
    CHECK(mean_f1 == doctest::Approx(expected).epsilon(1e-12));
    const double std_f1 = agg["metrics"]["f1"]["std"].get<double>();
    CHECK(std_f1 == doctest::Approx((1.0 - 2.0 / 3.0) / 2.0).epsilon(1e-12));
    CHECK(read_file(cfg.out_dir + "/aggregate.csv").rfind("metric,mean,std,n\n", 0) == 0);
}

TEST_CASE("unknown commands are rejected by name") {
    RunConfig cfg;
    CHECK_THROWS_WITH_AS(run_command(cfg, "trian"), doctest::Contains("trian"),
                         std::invalid_argument);
}
