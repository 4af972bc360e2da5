#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "d3fl/distributions.hpp"
#include "d3fl/rng.hpp"
#include "d3fl/timeseries.hpp"

namespace d3fl::synth {

// 2023-05-11T09:00:00Z, the first timestamp of every generated series
inline constexpr std::int64_t kStartEpoch = 1683795600;

struct SynthConfig {
    std::size_t n_points = 10000;
    double base_level = 8.0;
    double sine_amplitude = 3.0;
    double sine_period = 168.0;      // steps (hours); one week
    double client_phase_gain = 1.0;  // radians per client index
    double offset_value = 4.0;
    double offset_start_frac = 0.6;
    double clamp_lo = 2.0;
    double clamp_hi = 20.0;
    double gev_sigma = 1.0;
    double gev_xi = 0.1;
    double lognorm_mu = 0.0;
    double lognorm_sigma = 0.25;
};

// clamp_lo < clamp_hi, offset_start_frac in (0,1), n_points >= 1,
// positive scale parameters; violations raise std::invalid_argument
void validate(const SynthConfig& cfg);

enum class Regime { gev, lognorm, mixed };
std::string_view regime_name(Regime r);
Regime parse_regime(std::string_view name);

// deterministic location component: sine of weekly period with per-client
// phase, plus the level-shift offset from offset_start_frac*n_points onward
double location(std::size_t t, int client_id, const SynthConfig& cfg);

// location plus median-centered distribution noise, clamped to
// [clamp_lo, clamp_hi]; hourly timestamps from kStartEpoch
TimeSeries generate_client_series(int client_id, dist::DistKind kind, const SynthConfig& cfg,
                                  rng::RngStream& stream);

// clients are numbered 1..n_clients, each drawing from its own stream
// "client-<k>-data"; mixed assigns gev to clients 1..ceil(n/2)
std::vector<TimeSeries> generate_cohort(Regime regime, int n_clients, const SynthConfig& cfg,
                                        std::uint64_t master_seed);

}  // namespace d3fl::synth
