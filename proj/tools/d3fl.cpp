#include "CLI11.hpp"

#include "d3fl/config.hpp"
#include "d3fl/detrend.hpp"
#include "d3fl/eval.hpp"
#include "d3fl/federation.hpp"
#include "d3fl/ingest.hpp"
#include "d3fl/synth.hpp"
#include "d3fl/timeseries.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace d3fl;

namespace {

struct Common {
    std::string config_file;
    std::string out = "out";
    std::string scale;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* scale_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
};

std::string key_footer() {
    std::string f = "Configuration keys (for --config files):\n";
    for (const auto& k : config::key_registry()) {
        f += "  ";
        f += k.name;
        f.append(k.name.size() < 26 ? 26 - k.name.size() : 1, ' ');
        f += k.summary;
        f += '\n';
    }
    return f;
}

void add_common(CLI::App* sub, Common& c, const std::string& footer) {
    sub->add_option("--config", c.config_file, "key = value config file")
        ->check(CLI::ExistingFile);
    c.seed_opt = sub->add_option("--seed", c.seed, "master seed for data, init and shuffles");
    sub->add_option("--out", c.out, "output directory (default: out)");
    c.scale_opt = sub->add_option("--scale", c.scale, "desk|paper preset")
                      ->check(CLI::IsMember({"desk", "paper"}));
    c.jobs_opt = sub->add_option("--jobs", c.jobs, "concurrent client trainings");
    sub->footer(footer);
}

// defaults -> scale preset -> config file -> command-line flags
config::RunConfig resolve(const Common& c) {
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!c.config_file.empty()) pairs = config::parse_config_file(c.config_file);

    eval::ScalePreset scale = eval::ScalePreset::desk;
    for (const auto& [k, v] : pairs)
        if (k == "scale") scale = eval::parse_scale(v);
    if (c.scale_opt->count() > 0) scale = eval::parse_scale(c.scale);

    auto cfg = config::default_config(scale);
    for (const auto& [k, v] : pairs)
        if (k != "scale") config::set_key(cfg, k, v);

    if (c.seed_opt->count() > 0) cfg.fed_cfg.seed = c.seed;
    if (c.jobs_opt->count() > 0) {
        if (c.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
        cfg.fed_cfg.jobs = c.jobs;
    }
    return cfg;
}

void write_resolved(const config::RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream out(dir / "config.resolved", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "config.resolved").string());
    out << config::render_config(cfg);
}

void write_run_artifacts(const fed::RunResult& result, const std::vector<TimeSeries>& cohort,
                         const fs::path& dir) {
    fed::write_rounds_csv(result.reports, (dir / "rounds.csv").string());
    model::save_checkpoint(result.final_params, (dir / "model.ckpt").string());
    const auto& first = result.clients.front();
    eval::write_forecast_csv(
        result.final_params, first, cohort.front(),
        (dir / ("forecast_" + std::to_string(first.client_id) + ".csv")).string());
}

int cmd_generate(const Common& c, config::RunConfig cfg) {
    synth::validate(cfg.synth_cfg);
    const auto cohort =
        synth::generate_cohort(cfg.regime, cfg.n_clients, cfg.synth_cfg, cfg.fed_cfg.seed);
    write_resolved(cfg, c.out);
    for (const auto& ts : cohort) {
        const std::string name = "client_" + std::to_string(ts.client_id) + "_" +
                                 std::string(dist_label_name(ts.dist_label)) + ".csv";
        write_series_csv(ts, (fs::path(c.out) / name).string());
    }
    std::cout << "wrote " << cohort.size() << " series to " << c.out << "\n";
    return 0;
}

int cmd_ingest(const Common& c, config::RunConfig cfg, const std::string& input) {
    const auto series = ingest::ingest_file(input, cfg.ingest_cfg);
    write_resolved(cfg, c.out);
    write_series_csv(series, (fs::path(c.out) / "ingested.csv").string());
    std::cout << "wrote " << series.values.size() << " hourly points to " << c.out
              << "/ingested.csv\n";
    return 0;
}

int cmd_detrend(const Common& c, config::RunConfig cfg, const std::string& input) {
    auto series = read_series_csv(input);
    auto [detrended, state] = detrend::apply(series.values, cfg.technique);

    // detrended index j describes the original sample at j + shift
    std::int64_t shift = 0;
    if (state.tag == detrend::Technique::differencing) shift = 1;
    if (state.tag == detrend::Technique::moving_average)
        shift = static_cast<std::int64_t>(state.window) - 1;

    TimeSeries out_series;
    out_series.start_epoch = series.start_epoch + shift * series.step;
    out_series.step = series.step;
    out_series.values = std::move(detrended);

    write_resolved(cfg, c.out);
    write_series_csv(out_series, (fs::path(c.out) / "detrended.csv").string());
    detrend::save_state(state, (fs::path(c.out) / "detrend_state.txt").string());
    std::cout << "wrote " << out_series.values.size() << " detrended points to " << c.out
              << "/detrended.csv\n";
    return 0;
}

int cmd_train(const Common& c, config::RunConfig cfg, bool federated) {
    synth::validate(cfg.synth_cfg);
    const auto cohort =
        synth::generate_cohort(cfg.regime, cfg.n_clients, cfg.synth_cfg, cfg.fed_cfg.seed);
    const auto result = federated ? fed::run_federation(cohort, cfg.technique, cfg.fed_cfg)
                                  : fed::run_centralized(cohort, cfg.technique, cfg.fed_cfg);
    write_resolved(cfg, c.out);
    write_run_artifacts(result, cohort, c.out);
    const auto& last = result.reports.back().cohort;
    std::cout << (federated ? "federated" : "centralized") << " "
              << synth::regime_name(cfg.regime) << "/"
              << detrend::technique_name(cfg.technique.tag) << ": final cohort mse "
              << format_value(last.mse) << ", mae " << format_value(last.mae) << "\n";
    return 0;
}

int cmd_experiment(const Common& c, config::RunConfig cfg, std::size_t seeds) {
    if (seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
    const auto specs = eval::experiment_matrix();
    bool any_failed = false;

    auto run_one = [&](const config::RunConfig& run_cfg, const fs::path& dir) {
        write_resolved(run_cfg, dir);
        eval::SuiteConfig suite{run_cfg.synth_cfg, run_cfg.fed_cfg, run_cfg.n_clients};
        const auto outcomes = eval::run_suite(specs, suite, dir.string());
        std::size_t ok = 0;
        for (const auto& o : outcomes) {
            if (o.ok) {
                ++ok;
                continue;
            }
            any_failed = true;
            std::cerr << "exp " << o.spec.exp_num << " " << eval::mode_name(o.spec.mode)
                      << " failed: " << o.error << "\n";
        }
        std::cout << dir.string() << ": " << ok << "/" << outcomes.size() << " runs ok\n";
    };

    if (seeds == 1) {
        run_one(cfg, c.out);
    } else {
        write_resolved(cfg, c.out);
        for (std::size_t s = 0; s < seeds; ++s) {
            config::RunConfig per_seed = cfg;
            per_seed.fed_cfg.seed = cfg.fed_cfg.seed + s;
            run_one(per_seed, fs::path(c.out) / ("seed" + std::to_string(per_seed.fed_cfg.seed)));
        }
    }
    return any_failed ? 1 : 0;
}

int cmd_report(const std::string& out_dir) {
    std::vector<fs::path> summaries;
    if (fs::exists(fs::path(out_dir) / "summary.csv")) {
        summaries.push_back(fs::path(out_dir) / "summary.csv");
    } else if (fs::is_directory(out_dir)) {
        // a multi-seed layout: one summary per seed subdirectory
        for (const auto& entry : fs::directory_iterator(out_dir))
            if (entry.is_directory() && fs::exists(entry.path() / "summary.csv"))
                summaries.push_back(entry.path() / "summary.csv");
        std::sort(summaries.begin(), summaries.end());
    }
    if (summaries.empty())
        throw std::runtime_error("no summary.csv under " + out_dir +
                                 " (run the experiment subcommand first)");

    for (const auto& path : summaries) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path.string());
        std::cout << path.string() << "\n";
        std::string line;
        while (std::getline(in, line)) {
            std::string cell;
            std::stringstream ls(line);
            while (std::getline(ls, cell, ',')) std::printf("%-17s", cell.c_str());
            std::printf("\n");
        }
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"d3fl: federated vs centralized LSTM forecasting on non-linear time series"};
    app.require_subcommand(1);
    const std::string footer = key_footer();
    app.footer(footer);

    Common c_gen, c_ing, c_det, c_train, c_fed, c_exp;
    std::string regime, technique, input;
    std::size_t window = 0, rounds = 0, seeds = 1;
    int clients = 0;
    std::size_t points = 0;
    std::string report_dir = "out";

    auto* gen = app.add_subcommand("generate", "synthesize a client cohort as CSV files");
    add_common(gen, c_gen, footer);
    auto* gen_regime = gen->add_option("--regime", regime, "gev|lognorm|mixed");
    auto* gen_clients = gen->add_option("--clients", clients, "cohort size");
    auto* gen_points = gen->add_option("--points", points, "points per client");

    auto* ing = app.add_subcommand("ingest", "load a raw meter CSV and emit an hourly series");
    add_common(ing, c_ing, footer);
    ing->add_option("--input", input, "raw CSV file")->required()->check(CLI::ExistingFile);

    auto* det = app.add_subcommand("detrend", "detrend a timestamp,value CSV");
    add_common(det, c_det, footer);
    auto* det_input =
        det->add_option("--input", input, "series CSV file")->required()->check(CLI::ExistingFile);
    auto* det_tech = det->add_option("--technique", technique, "detrending technique");
    auto* det_window = det->add_option("--window", window, "moving-average window");
    (void)det_input;

    auto* train = app.add_subcommand("train", "centralized baseline on a synthetic cohort");
    add_common(train, c_train, footer);
    auto* train_regime = train->add_option("--regime", regime, "gev|lognorm|mixed");
    auto* train_tech = train->add_option("--technique", technique, "detrending technique");
    auto* train_window = train->add_option("--window", window, "moving-average window");
    auto* train_rounds = train->add_option("--rounds", rounds, "training epochs");
    auto* train_clients = train->add_option("--clients", clients, "cohort size");
    auto* train_points = train->add_option("--points", points, "points per client");

    auto* fedc = app.add_subcommand("federate", "federated training on a synthetic cohort");
    add_common(fedc, c_fed, footer);
    auto* fed_regime = fedc->add_option("--regime", regime, "gev|lognorm|mixed");
    auto* fed_tech = fedc->add_option("--technique", technique, "detrending technique");
    auto* fed_window = fedc->add_option("--window", window, "moving-average window");
    auto* fed_rounds = fedc->add_option("--rounds", rounds, "global rounds");
    auto* fed_clients = fedc->add_option("--clients", clients, "cohort size");
    auto* fed_points = fedc->add_option("--points", points, "points per client");

    auto* exp = app.add_subcommand("experiment", "run the 18-experiment matrix in both modes");
    add_common(exp, c_exp, footer);
    exp->add_option("--seeds", seeds, "repeat the suite for consecutive seeds");
    auto* exp_clients = exp->add_option("--clients", clients, "cohort size");
    auto* exp_points = exp->add_option("--points", points, "points per client");

    auto* rep = app.add_subcommand("report", "print the summary of an experiment directory");
    rep->add_option("--out", report_dir, "experiment output directory");
    rep->footer(footer);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            auto cfg = resolve(c_gen);
            if (gen_regime->count()) config::set_key(cfg, "synth.regime", regime);
            if (gen_clients->count()) config::set_key(cfg, "eval.n_clients", std::to_string(clients));
            if (gen_points->count()) config::set_key(cfg, "synth.n_points", std::to_string(points));
            return cmd_generate(c_gen, std::move(cfg));
        }
        if (*ing) {
            return cmd_ingest(c_ing, resolve(c_ing), input);
        }
        if (*det) {
            auto cfg = resolve(c_det);
            if (det_tech->count()) config::set_key(cfg, "detrend.technique", technique);
            if (det_window->count()) config::set_key(cfg, "detrend.window", std::to_string(window));
            return cmd_detrend(c_det, std::move(cfg), input);
        }
        if (*train || *fedc) {
            const bool federated = static_cast<bool>(*fedc);
            const Common& c = federated ? c_fed : c_train;
            auto cfg = resolve(c);
            auto* opt_regime = federated ? fed_regime : train_regime;
            auto* opt_tech = federated ? fed_tech : train_tech;
            auto* opt_window = federated ? fed_window : train_window;
            auto* opt_rounds = federated ? fed_rounds : train_rounds;
            auto* opt_clients = federated ? fed_clients : train_clients;
            auto* opt_points = federated ? fed_points : train_points;
            if (opt_regime->count()) config::set_key(cfg, "synth.regime", regime);
            if (opt_tech->count()) config::set_key(cfg, "detrend.technique", technique);
            if (opt_window->count()) config::set_key(cfg, "detrend.window", std::to_string(window));
            if (opt_rounds->count()) config::set_key(cfg, "fed.rounds", std::to_string(rounds));
            if (opt_clients->count()) config::set_key(cfg, "eval.n_clients", std::to_string(clients));
            if (opt_points->count()) config::set_key(cfg, "synth.n_points", std::to_string(points));
            return cmd_train(c, std::move(cfg), federated);
        }
        if (*exp) {
            auto cfg = resolve(c_exp);
            if (exp_clients->count()) config::set_key(cfg, "eval.n_clients", std::to_string(clients));
            if (exp_points->count()) config::set_key(cfg, "synth.n_points", std::to_string(points));
            return cmd_experiment(c_exp, std::move(cfg), seeds);
        }
        if (*rep) {
            return cmd_report(report_dir);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
