#include "d3fl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace d3fl::synth {

namespace {
constexpr double kTwoPi = 6.2831853071795864769;
}

void validate(const SynthConfig& cfg) {
    if (cfg.n_points < 1) throw std::invalid_argument("synth: n_points must be >= 1");
    if (!(cfg.clamp_lo < cfg.clamp_hi))
        throw std::invalid_argument("synth: clamp_lo must be below clamp_hi");
    if (!(cfg.offset_start_frac > 0.0 && cfg.offset_start_frac < 1.0))
        throw std::invalid_argument("synth: offset_start_frac must lie in (0,1)");
    if (!(cfg.sine_period > 0.0)) throw std::invalid_argument("synth: sine_period must be > 0");
    if (!(cfg.gev_sigma > 0.0) || !(cfg.lognorm_sigma > 0.0))
        throw std::invalid_argument("synth: distribution scale parameters must be > 0");
    for (double v : {cfg.base_level, cfg.sine_amplitude, cfg.client_phase_gain,
                     cfg.offset_value, cfg.gev_xi, cfg.lognorm_mu})
        if (!std::isfinite(v)) throw std::invalid_argument("synth: non-finite config value");
}

std::string_view regime_name(Regime r) {
    switch (r) {
        case Regime::gev: return "gev";
        case Regime::lognorm: return "lognorm";
        case Regime::mixed: return "mixed";
    }
    return "gev";
}

Regime parse_regime(std::string_view name) {
    if (name == "gev") return Regime::gev;
    if (name == "lognorm") return Regime::lognorm;
    if (name == "mixed") return Regime::mixed;
    throw std::invalid_argument("unknown regime: " + std::string(name));
}

double location(std::size_t t, int client_id, const SynthConfig& cfg) {
    const double phase = cfg.client_phase_gain * static_cast<double>(client_id);
    double v = cfg.base_level +
               cfg.sine_amplitude * std::sin(kTwoPi * static_cast<double>(t) / cfg.sine_period + phase);
    if (static_cast<double>(t) >= cfg.offset_start_frac * static_cast<double>(cfg.n_points))
        v += cfg.offset_value;
    return v;
}

TimeSeries generate_client_series(int client_id, dist::DistKind kind, const SynthConfig& cfg,
                                  rng::RngStream& stream) {
    validate(cfg);
    const dist::GevParams gp{0.0, cfg.gev_sigma, cfg.gev_xi};
    const dist::LogNormParams lp{cfg.lognorm_mu, cfg.lognorm_sigma};
    const double median =
        kind == dist::DistKind::gev ? dist::gev_median(gp) : dist::lognorm_median(lp);

    TimeSeries ts;
    ts.start_epoch = kStartEpoch;
    ts.step = 3600;
    ts.client_id = client_id;
    ts.dist_label = kind == dist::DistKind::gev ? DistLabel::gev : DistLabel::lognorm;
    ts.values.resize(cfg.n_points);
    for (std::size_t t = 0; t < cfg.n_points; ++t) {
        const double noise =
            (kind == dist::DistKind::gev ? dist::gev_quantile(stream.uniform01(), gp)
                                         : dist::lognorm_quantile(stream.uniform01(), lp)) -
            median;
        ts.values[t] = std::clamp(location(t, client_id, cfg) + noise, cfg.clamp_lo, cfg.clamp_hi);
    }
    return ts;
}

std::vector<TimeSeries> generate_cohort(Regime regime, int n_clients, const SynthConfig& cfg,
                                        std::uint64_t master_seed) {
    validate(cfg);
    if (n_clients < 1) throw std::invalid_argument("synth: need at least one client");
    if (regime == Regime::mixed && n_clients < 2)
        throw std::invalid_argument("synth: mixed regime needs at least two clients");

    const int n_gev = (n_clients + 1) / 2;
    std::vector<TimeSeries> cohort;
    cohort.reserve(n_clients);
    for (int k = 1; k <= n_clients; ++k) {
        dist::DistKind kind;
        switch (regime) {
            case Regime::gev: kind = dist::DistKind::gev; break;
            case Regime::lognorm: kind = dist::DistKind::lognorm; break;
            default: kind = k <= n_gev ? dist::DistKind::gev : dist::DistKind::lognorm;
        }
        rng::RngStream stream(master_seed, "client-" + std::to_string(k) + "-data");
        cohort.push_back(generate_client_series(k, kind, cfg, stream));
    }
    return cohort;
}

}  // namespace d3fl::synth
