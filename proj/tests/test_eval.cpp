#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "d3fl/eval.hpp"
#include "d3fl/kernels.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace d3fl;
using eval::ExperimentSpec;
using eval::Mode;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("d3fl_eval_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

eval::SuiteConfig tiny_suite() {
    eval::SuiteConfig cfg;
    cfg.n_clients = 3;
    cfg.synth_cfg.n_points = 120;
    cfg.fed_cfg.rounds = 2;
    cfg.fed_cfg.hidden = 8;
    cfg.fed_cfg.lookback = 8;
    cfg.fed_cfg.horizon = 2;
    cfg.fed_cfg.batch = 16;
    cfg.fed_cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("compute_metrics worked examples and guards") {
    auto m = eval::compute_metrics({{1, 2}}, {{1, 4}});
    CHECK(m.mse == 2.0);
    CHECK(m.rmse == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(m.mae == 1.0);

    auto z = eval::compute_metrics({{3, 1}, {2, 2}}, {{3, 1}, {2, 2}});
    CHECK(z.mse == 0.0);
    CHECK(z.rmse == 0.0);
    CHECK(z.mae == 0.0);

    auto big = eval::compute_metrics({{0, 0}, {0, 0}}, {{1, 1}, {3, 3}});
    CHECK(big.mse == 5.0);
    CHECK(big.mae == 2.0);
    CHECK(big.rmse == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));

    CHECK_THROWS_AS(eval::compute_metrics({}, {}), std::domain_error);
    CHECK_THROWS_AS(eval::compute_metrics({{1}}, {{1}, {2}}), std::invalid_argument);
    CHECK_THROWS_AS(eval::compute_metrics({{1}}, {{1, 2}}), std::invalid_argument);
}

TEST_CASE("compute_metrics is permutation invariant with rmse^2 = mse") {
    rng::RngStream s(4, "metrics");
    std::vector<std::vector<double>> preds, targets;
    for (int i = 0; i < 40; ++i) {
        preds.push_back({s.uniform01(), s.uniform01()});
        targets.push_back({s.uniform01(), s.uniform01()});
    }
    const auto a = eval::compute_metrics(preds, targets);
    std::reverse(preds.begin(), preds.end());
    std::reverse(targets.begin(), targets.end());
    const auto b = eval::compute_metrics(preds, targets);
    CHECK(a.mse == doctest::Approx(b.mse).epsilon(1e-12));
    CHECK(a.mae == doctest::Approx(b.mae).epsilon(1e-12));
    CHECK(a.rmse * a.rmse == doctest::Approx(a.mse).epsilon(1e-12));
}

TEST_CASE("experiment matrix golden table") {
    using detrend::Technique;
    const auto specs = eval::experiment_matrix();
    REQUIRE(specs.size() == 18);

    const Technique expect_tech[18] = {
        Technique::none,           Technique::none,           Technique::none,
        Technique::differencing,   Technique::differencing,   Technique::differencing,
        Technique::moving_average, Technique::moving_average, Technique::moving_average,
        Technique::subtract_mean,  Technique::subtract_mean,  Technique::subtract_mean,
        Technique::linear_model,   Technique::linear_model,   Technique::linear_model,
        Technique::quadratic_model, Technique::quadratic_model, Technique::quadratic_model};
    const synth::Regime expect_regime[18] = {
        synth::Regime::gev, synth::Regime::lognorm, synth::Regime::mixed,
        synth::Regime::gev, synth::Regime::lognorm, synth::Regime::mixed,
        synth::Regime::gev, synth::Regime::lognorm, synth::Regime::mixed,
        synth::Regime::gev, synth::Regime::lognorm, synth::Regime::mixed,
        synth::Regime::gev, synth::Regime::lognorm, synth::Regime::mixed,
        synth::Regime::gev, synth::Regime::lognorm, synth::Regime::mixed};
    for (int i = 0; i < 18; ++i) {
        CHECK(specs[i].exp_num == i + 1);
        CHECK(specs[i].technique.tag == expect_tech[i]);
        CHECK(specs[i].regime == expect_regime[i]);
    }

    // spot rows called out in the study design
    CHECK(specs[4].technique.tag == Technique::differencing);   // exp 5
    CHECK(specs[4].regime == synth::Regime::lognorm);
    CHECK(specs[15].technique.tag == Technique::quadratic_model);  // exp 16
    CHECK(specs[15].regime == synth::Regime::gev);

    // the mixed regime labels the first half gev
    synth::SynthConfig scfg;
    scfg.n_points = 40;
    const auto cohort = synth::generate_cohort(synth::Regime::mixed, 10, scfg, 1);
    for (int k = 0; k < 5; ++k) CHECK(cohort[k].dist_label == DistLabel::gev);
    for (int k = 5; k < 10; ++k) CHECK(cohort[k].dist_label == DistLabel::lognorm);
}

TEST_CASE("mode and scale parsing") {
    CHECK(eval::parse_mode("centralized") == Mode::centralized);
    CHECK(eval::parse_mode("federated") == Mode::federated);
    CHECK(eval::mode_name(Mode::federated) == "federated");
    CHECK_THROWS_AS(eval::parse_mode("p2p"), std::invalid_argument);

    CHECK(eval::parse_scale("desk") == eval::ScalePreset::desk);
    CHECK(eval::parse_scale("paper") == eval::ScalePreset::paper);
    CHECK_THROWS_AS(eval::parse_scale("huge"), std::invalid_argument);

    eval::SuiteConfig cfg;
    eval::apply_scale(eval::ScalePreset::desk, cfg);
    CHECK(cfg.synth_cfg.n_points == 2000);
    CHECK(cfg.fed_cfg.rounds == 30);
    CHECK(cfg.fed_cfg.hidden == 32);
    eval::apply_scale(eval::ScalePreset::paper, cfg);
    CHECK(cfg.synth_cfg.n_points == 10000);
    CHECK(cfg.fed_cfg.rounds == 100);
    CHECK(cfg.fed_cfg.hidden == 128);
}

TEST_CASE("run_experiment leaves the documented artifacts") {
    const auto dir = temp_dir("run");
    auto cfg = tiny_suite();
    ExperimentSpec spec;
    spec.exp_num = 4;
    spec.technique.tag = detrend::Technique::differencing;
    spec.regime = synth::Regime::gev;
    spec.mode = Mode::federated;

    const auto out = eval::run_experiment(spec, cfg, dir.string());
    REQUIRE(out.ok);
    CHECK(out.run_dir == "exp04_federated");
    CHECK(fs::exists(dir / "exp04_federated" / "rounds.csv"));
    CHECK(fs::exists(dir / "exp04_federated" / "model.ckpt"));
    CHECK(fs::exists(dir / "exp04_federated" / "forecast_1.csv"));
    CHECK(out.final_cohort.mse >= 0.0);
    CHECK(out.final_cohort.rmse ==
          doctest::Approx(std::sqrt(out.final_cohort.mse)).epsilon(1e-12));

    // the checkpoint reloads with the preset dimensions
    const auto p = model::load_checkpoint((dir / "exp04_federated" / "model.ckpt").string());
    CHECK(p.H == 8);
    CHECK(p.O == 2);

    // rounds.csv: 2 rounds x (3 clients + cohort row) + header
    const auto rounds = parse_csv(slurp(dir / "exp04_federated" / "rounds.csv"));
    CHECK(rounds.size() == 1 + 2 * 4);
    CHECK(rounds[0] == std::vector<std::string>({"round", "client_id", "mse", "rmse", "mae"}));
    CHECK(rounds[4][1] == "cohort");
    fs::remove_all(dir);
}

TEST_CASE("forecast files invert scaling and detrending") {
    auto cfg = tiny_suite();
    const auto cohort = synth::generate_cohort(synth::Regime::gev, 2, cfg.synth_cfg, 3);

    for (auto tag : {detrend::Technique::none, detrend::Technique::differencing}) {
        const auto dir = temp_dir(std::string("fc_") + std::string(detrend::technique_name(tag)));
        const auto res = fed::run_federation(cohort, {tag}, cfg.fed_cfg);
        const auto& client = res.clients.front();
        const auto path = (dir / "forecast_1.csv").string();
        eval::write_forecast_csv(res.final_params, client, cohort.front(), path);

        const auto rows = parse_csv(slurp(path));
        REQUIRE(rows.size() == 1 + client.val.size());
        CHECK(rows[0] == std::vector<std::string>({"timestamp", "actual", "predicted"}));

        const std::size_t T = client.train.size();
        const std::size_t L = client.val.L;
        const std::size_t shift = tag == detrend::Technique::differencing ? 1 : 0;
        model::ForwardTape tape;
        for (std::size_t w = 0; w < client.val.size(); ++w) {
            const auto& row = rows[1 + w];
            const std::size_t j = T + w + L;
            const std::size_t oi = j + shift;
            CHECK(row[0] == format_iso8601(cohort.front().timestamp_at(oi)));
            CHECK(std::stod(row[1]) ==
                  doctest::Approx(cohort.front().values[oi]).epsilon(5e-9));

            model::forward(res.final_params, client.val.input(w), L, tape);
            const double pd = model::inverse_scale(tape.pred[0], client.scaler);
            const double expect =
                tag == detrend::Technique::none ? pd : cohort.front().values[j] + pd;
            CHECK(std::stod(row[2]) == doctest::Approx(expect).epsilon(1e-6));
        }
        fs::remove_all(dir);
    }
}

TEST_CASE("run_suite ordering, failure isolation, summary rows") {
    const auto dir = temp_dir("suite");
    auto cfg = tiny_suite();
    cfg.fed_cfg.rounds = 1;

    ExperimentSpec ok;
    ok.exp_num = 4;
    ok.technique.tag = detrend::Technique::differencing;
    ok.regime = synth::Regime::gev;

    ExperimentSpec bad;  // moving average window longer than the series
    bad.exp_num = 7;
    bad.technique.tag = detrend::Technique::moving_average;
    bad.technique.window = 5000;
    bad.regime = synth::Regime::gev;

    const auto outcomes = eval::run_suite({bad, ok}, cfg, dir.string());
    REQUIRE(outcomes.size() == 4);
    CHECK(outcomes[0].spec.exp_num == 4);
    CHECK(outcomes[0].spec.mode == Mode::centralized);
    CHECK(outcomes[1].spec.exp_num == 4);
    CHECK(outcomes[1].spec.mode == Mode::federated);
    CHECK(outcomes[0].ok);
    CHECK(outcomes[1].ok);
    CHECK_FALSE(outcomes[2].ok);
    CHECK_FALSE(outcomes[3].ok);
    CHECK(!outcomes[2].error.empty());

    const auto rows = parse_csv(slurp(dir / "summary.csv"));
    REQUIRE(rows.size() == 3);  // header + the two successful runs
    CHECK(rows[0] ==
          std::vector<std::string>({"exp", "mode", "technique", "regime", "mse", "rmse", "mae"}));
    CHECK(rows[1][0] == "4");
    CHECK(rows[1][1] == "centralized");
    CHECK(rows[1][2] == "differencing");
    CHECK(rows[1][3] == "gev");
    CHECK(rows[2][1] == "federated");
    fs::remove_all(dir);
}

TEST_CASE("suite reruns are byte-identical") {
    auto cfg = tiny_suite();
    cfg.fed_cfg.rounds = 1;
    cfg.n_clients = 2;
    ExperimentSpec spec;
    spec.exp_num = 1;
    spec.technique.tag = detrend::Technique::none;
    spec.regime = synth::Regime::lognorm;

    const auto d1 = temp_dir("rerun1");
    const auto d2 = temp_dir("rerun2");
    eval::run_suite({spec}, cfg, d1.string());
    eval::run_suite({spec}, cfg, d2.string());

    for (const char* rel :
         {"summary.csv", "exp01_federated/rounds.csv", "exp01_federated/forecast_1.csv",
          "exp01_centralized/rounds.csv", "exp01_centralized/model.ckpt"}) {
        CHECK(slurp(d1 / rel) == slurp(d2 / rel));
    }
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("summary formatting golden") {
    eval::RunOutcome a;
    a.spec.exp_num = 2;
    a.spec.technique.tag = detrend::Technique::none;
    a.spec.regime = synth::Regime::lognorm;
    a.spec.mode = Mode::centralized;
    a.ok = true;
    a.final_cohort = {0.25, 0.5, 0.125};

    eval::RunOutcome failed;
    failed.spec.exp_num = 3;
    failed.ok = false;

    const auto dir = temp_dir("golden");
    const auto path = (dir / "summary.csv").string();
    eval::write_summary_csv({a, failed}, path);
    CHECK(slurp(path) ==
          "exp,mode,technique,regime,mse,rmse,mae\n"
          "2,centralized,none,lognorm,0.25,0.5,0.125\n");
    fs::remove_all(dir);
}
