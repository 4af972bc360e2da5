#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "d3fl/detrend.hpp"
#include "d3fl/federation.hpp"
#include "d3fl/metrics.hpp"
#include "d3fl/synth.hpp"

namespace d3fl::eval {

enum class Mode { centralized, federated };
std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);

struct ExperimentSpec {
    int exp_num = 1;
    detrend::DetrendTechnique technique;
    synth::Regime regime = synth::Regime::gev;
    Mode mode = Mode::federated;
};

// The 18-row technique/regime grid. Rows 1-3 apply no detrending, then each
// following triple switches technique (differencing, moving average,
// subtract mean, linear fit, quadratic fit) while cycling the regimes
// (gev, lognorm, mixed). The suite runs every row in both modes.
std::vector<ExperimentSpec> experiment_matrix();

enum class ScalePreset { desk, paper };
std::string_view scale_name(ScalePreset p);
ScalePreset parse_scale(std::string_view name);

struct SuiteConfig {
    synth::SynthConfig synth_cfg;
    fed::FederationConfig fed_cfg;
    int n_clients = 10;
};

// desk: 2,000 points/client, 30 rounds, H=32 (the acceptance configuration);
// paper: 10,000 points, 100 rounds, H=128
void apply_scale(ScalePreset p, SuiteConfig& cfg);

struct RunOutcome {
    ExperimentSpec spec;
    bool ok = false;
    std::string error;
    Metrics final_cohort;  // mse/mae are cohort means; rmse = sqrt(mse)
    std::string run_dir;   // relative to the suite output directory
};

// One (experiment, mode) run: synthesize the cohort, train, and leave
// rounds.csv, forecast_<client>.csv and model.ckpt in out_dir/<run_dir>.
RunOutcome run_experiment(const ExperimentSpec& spec, const SuiteConfig& cfg,
                          const std::string& out_dir);

// Executes every spec in both modes (centralized first within each
// exp_num), collecting failures instead of aborting, and writes
// summary.csv. Rows appear in ascending exp_num order.
std::vector<RunOutcome> run_suite(const std::vector<ExperimentSpec>& specs,
                                  const SuiteConfig& cfg, const std::string& out_dir);

// `exp,mode,technique,regime,mse,rmse,mae`; one row per successful run
void write_summary_csv(const std::vector<RunOutcome>& outcomes, const std::string& path);

// Horizon-1 forecasts over the validation region, mapped back to data units
// through the scaler and the detrend inversion; columns
// `timestamp,actual,predicted`.
void write_forecast_csv(const model::ModelParams& params, const fed::ClientHandle& client,
                        const TimeSeries& series, const std::string& path);

}  // namespace d3fl::eval
