#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "d3fl/detrend.hpp"
#include "d3fl/metrics.hpp"
#include "d3fl/model.hpp"
#include "d3fl/timeseries.hpp"

namespace d3fl::fed {

struct FederationConfig {
    std::size_t rounds = 100;
    std::size_t local_epochs = 1;
    std::size_t hidden = 128;
    std::size_t lookback = 24;
    std::size_t horizon = 2;
    std::size_t batch = 32;
    double train_frac = 0.9;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;  // clients trained concurrently per round
};

// One simulated participant. Clients are stateless between rounds: local
// training starts every round from the broadcast parameters with a fresh
// optimizer, so nothing but the global model survives aggregation.
struct ClientHandle {
    int client_id = 0;
    model::WindowedDataset train;
    model::WindowedDataset val;
    model::Scaler scaler;
    detrend::DetrendState state;
    std::vector<double> detrended;  // unscaled, for forecast reconstruction
};

struct RoundReport {
    std::size_t round = 0;  // 1-based
    std::vector<int> client_ids;
    std::vector<eval::Metrics> per_client;
    eval::Metrics cohort;    // arithmetic mean of each metric column
    double wall_seconds = 0.0;  // kept in memory only, never serialized
};

struct Update {
    int client_id = 0;
    std::vector<double> params;
    std::size_t sample_count = 0;
};

// Sample-count-weighted average. Weights are normalized first and the terms
// are pairwise-summed in ascending client_id order, so the result is
// bit-identical under any permutation of the update list.
std::vector<double> fedavg(const std::vector<Update>& updates);

// detrend -> min-max scale fitted on the training-visible prefix -> window
// -> chronological 90/10 split
ClientHandle prepare_client(const TimeSeries& series, const detrend::DetrendTechnique& tech,
                            const FederationConfig& cfg);
std::vector<ClientHandle> prepare_clients(const std::vector<TimeSeries>& cohort,
                                          const detrend::DetrendTechnique& tech,
                                          const FederationConfig& cfg);

eval::Metrics evaluate(const model::ModelParams& p, const model::WindowedDataset& ds);

// Broadcast -> local training -> aggregation -> evaluation of the NEW global
// model on every client's validation set. Mutates `global` in place.
RoundReport run_round(model::ModelParams& global, std::vector<ClientHandle>& clients,
                      const FederationConfig& cfg, std::size_t round_index);

struct RunResult {
    model::ModelParams final_params;
    std::vector<RoundReport> reports;
    std::vector<ClientHandle> clients;
};

RunResult run_federation(const std::vector<TimeSeries>& cohort,
                         const detrend::DetrendTechnique& tech, const FederationConfig& cfg);

// Baseline: all clients' training windows concatenated into one dataset,
// trained one epoch per round on a per-epoch optimizer, evaluated
// per client like the federated runs.
RunResult run_centralized(const std::vector<TimeSeries>& cohort,
                          const detrend::DetrendTechnique& tech, const FederationConfig& cfg);

// `round,client_id,mse,rmse,mae` rows plus a `cohort` pseudo-client row per round
void write_rounds_csv(const std::vector<RoundReport>& reports, const std::string& path);

}  // namespace d3fl::fed
