#include "d3fl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace d3fl::config {

namespace {

std::string fmt(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, p};
}

template <class Int>
std::string fmt(Int v) {
    return std::to_string(v);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw std::invalid_argument("bad value '" + std::string(value) + "' for key '" +
                                std::string(key) + "'");
}

double parse_double(std::string_view key, std::string_view value) {
    double v{};
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size()) bad_value(key, value);
    return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view value, Int min_allowed) {
    Int v{};
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size() || v < min_allowed)
        bad_value(key, value);
    return v;
}

struct KeyDef {
    std::string_view name;
    std::string_view summary;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

// table rows stay terse through these three shapes
KeyDef dbl_key(std::string_view n, std::string_view s, double& (*ref)(RunConfig&)) {
    return {n, s, [n, ref](RunConfig& c, std::string_view v) { ref(c) = parse_double(n, v); },
            [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); }};
}

template <class Int>
KeyDef int_key(std::string_view n, std::string_view s, Int& (*ref)(RunConfig&),
               Int min_allowed) {
    return {n, s,
            [n, ref, min_allowed](RunConfig& c, std::string_view v) {
                ref(c) = parse_int<Int>(n, v, min_allowed);
            },
            [ref](const RunConfig& c) { return fmt(ref(const_cast<RunConfig&>(c))); }};
}

KeyDef str_key(std::string_view n, std::string_view s, std::string& (*ref)(RunConfig&)) {
    return {n, s,
            [n, ref](RunConfig& c, std::string_view v) {
                if (v.empty()) bad_value(n, v);
                ref(c) = std::string(v);
            },
            [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }};
}

std::vector<KeyDef> build_registry() {
    std::vector<KeyDef> t;

    t.push_back({"detrend.technique",
                 "none|differencing|moving_average|subtract_mean|linear_model|quadratic_model",
                 [](RunConfig& c, std::string_view v) {
                     c.technique.tag = detrend::parse_technique(v);
                 },
                 [](const RunConfig& c) {
                     return std::string(detrend::technique_name(c.technique.tag));
                 }});
    t.push_back(int_key<std::size_t>(
        "detrend.window", "moving-average window length (>= 2)",
        [](RunConfig& c) -> std::size_t& { return c.technique.window; }, 2));
    t.push_back(int_key<int>(
        "eval.n_clients", "cohort size",
        [](RunConfig& c) -> int& { return c.n_clients; }, 1));
    t.push_back(int_key<std::size_t>(
        "fed.local_epochs", "local epochs per round",
        [](RunConfig& c) -> std::size_t& { return c.fed_cfg.local_epochs; }, 1));
    t.push_back(int_key<std::size_t>(
        "fed.rounds", "global rounds (centralized: epochs)",
        [](RunConfig& c) -> std::size_t& { return c.fed_cfg.rounds; }, 1));
    t.push_back(dbl_key("ingest.max_missing", "tolerated gap fraction",
                        [](RunConfig& c) -> double& { return c.ingest_cfg.max_missing; }));
    t.push_back(int_key<std::int64_t>(
        "ingest.source_step", "raw reading spacing, seconds",
        [](RunConfig& c) -> std::int64_t& { return c.ingest_cfg.source_step; }, 1));
    t.push_back(int_key<std::int64_t>(
        "ingest.target_step", "resampling bucket, seconds",
        [](RunConfig& c) -> std::int64_t& { return c.ingest_cfg.target_step; }, 1));
    t.push_back(str_key("ingest.timestamp_column", "timestamp column name",
                        [](RunConfig& c) -> std::string& { return c.ingest_cfg.timestamp_column; }));
    t.push_back(str_key("ingest.value_column", "value column name",
                        [](RunConfig& c) -> std::string& { return c.ingest_cfg.value_column; }));
    t.push_back(int_key<std::size_t>(
        "jobs", "concurrent client trainings",
        [](RunConfig& c) -> std::size_t& { return c.fed_cfg.jobs; }, 1));
    t.push_back(int_key<std::size_t>(
        "model.batch", "minibatch size",
        [](RunConfig& c) -> std::size_t& { return c.fed_cfg.batch; }, 1));
    t.push_back(int_key<std::size_t>(
        "model.hidden", "LSTM hidden units",
        [](RunConfig& c) -> std::size_t& { return c.fed_cfg.hidden; }, 1));
    t.push_back(int_key<std::size_t>(
        "model.horizon", "predicted steps",
        [](RunConfig& c) -> std::size_t& { return c.fed_cfg.horizon; }, 1));
    t.push_back(int_key<std::size_t>(
        "model.lookback", "input window steps",
        [](RunConfig& c) -> std::size_t& { return c.fed_cfg.lookback; }, 1));
    t.push_back({"model.train_frac", "chronological train fraction in (0,1)",
                 [](RunConfig& c, std::string_view v) {
                     const double f = parse_double("model.train_frac", v);
                     if (f <= 0.0 || f >= 1.0) bad_value("model.train_frac", v);
                     c.fed_cfg.train_frac = f;
                 },
                 [](const RunConfig& c) { return fmt(c.fed_cfg.train_frac); }});
    t.push_back({"scale", "desk|paper preset (points/rounds/hidden)",
                 [](RunConfig& c, std::string_view v) {
                     c.scale = eval::parse_scale(v);
                     eval::SuiteConfig s{c.synth_cfg, c.fed_cfg, c.n_clients};
                     eval::apply_scale(c.scale, s);
                     c.synth_cfg = s.synth_cfg;
                     c.fed_cfg = s.fed_cfg;
                 },
                 [](const RunConfig& c) { return std::string(eval::scale_name(c.scale)); }});
    t.push_back(int_key<std::uint64_t>(
        "seed", "master seed for data, init and shuffles",
        [](RunConfig& c) -> std::uint64_t& { return c.fed_cfg.seed; }, 0));
    t.push_back(dbl_key("synth.base_level", "location baseline",
                        [](RunConfig& c) -> double& { return c.synth_cfg.base_level; }));
    t.push_back(dbl_key("synth.clamp_hi", "upper clamp of generated values",
                        [](RunConfig& c) -> double& { return c.synth_cfg.clamp_hi; }));
    t.push_back(dbl_key("synth.clamp_lo", "lower clamp of generated values",
                        [](RunConfig& c) -> double& { return c.synth_cfg.clamp_lo; }));
    t.push_back(dbl_key("synth.client_phase_gain", "per-client sine phase, radians",
                        [](RunConfig& c) -> double& { return c.synth_cfg.client_phase_gain; }));
    t.push_back(dbl_key("synth.gev_sigma", "GEV scale",
                        [](RunConfig& c) -> double& { return c.synth_cfg.gev_sigma; }));
    t.push_back(dbl_key("synth.gev_xi", "GEV shape",
                        [](RunConfig& c) -> double& { return c.synth_cfg.gev_xi; }));
    t.push_back(dbl_key("synth.lognorm_mu", "log-normal log-mean",
                        [](RunConfig& c) -> double& { return c.synth_cfg.lognorm_mu; }));
    t.push_back(dbl_key("synth.lognorm_sigma", "log-normal log-sd",
                        [](RunConfig& c) -> double& { return c.synth_cfg.lognorm_sigma; }));
    t.push_back(int_key<std::size_t>(
        "synth.n_points", "points per client",
        [](RunConfig& c) -> std::size_t& { return c.synth_cfg.n_points; }, 1));
    t.push_back(dbl_key("synth.offset_start_frac", "level-shift start fraction",
                        [](RunConfig& c) -> double& { return c.synth_cfg.offset_start_frac; }));
    t.push_back(dbl_key("synth.offset_value", "level-shift height",
                        [](RunConfig& c) -> double& { return c.synth_cfg.offset_value; }));
    t.push_back({"synth.regime", "gev|lognorm|mixed",
                 [](RunConfig& c, std::string_view v) { c.regime = synth::parse_regime(v); },
                 [](const RunConfig& c) { return std::string(synth::regime_name(c.regime)); }});
    t.push_back(dbl_key("synth.sine_amplitude", "weekly sine amplitude",
                        [](RunConfig& c) -> double& { return c.synth_cfg.sine_amplitude; }));
    t.push_back(dbl_key("synth.sine_period", "sine period in steps",
                        [](RunConfig& c) -> double& { return c.synth_cfg.sine_period; }));
    std::sort(t.begin(), t.end(),
              [](const KeyDef& a, const KeyDef& b) { return a.name < b.name; });
    return t;
}

const std::vector<KeyDef>& registry() {
    static const std::vector<KeyDef> table = build_registry();
    return table;
}

const KeyDef* find(std::string_view key) {
    for (const auto& d : registry())
        if (d.name == key) return &d;
    return nullptr;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const std::vector<KeyInfo>& key_registry() {
    static const std::vector<KeyInfo> info = [] {
        std::vector<KeyInfo> v;
        for (const auto& d : registry()) v.push_back({d.name, d.summary});
        return v;
    }();
    return info;
}

void set_key(RunConfig& cfg, std::string_view key, std::string_view value) {
    const KeyDef* d = find(key);
    if (!d) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    d->set(cfg, value);
}

std::string get_key(const RunConfig& cfg, std::string_view key) {
    const KeyDef* d = find(key);
    if (!d) throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    return d->get(cfg);
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key");
        pairs.emplace_back(std::move(key), std::move(value));
    }
    return pairs;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    const auto pairs = parse_config_file(path);
    for (const auto& [k, v] : pairs)
        if (k == "scale") set_key(cfg, k, v);
    for (const auto& [k, v] : pairs)
        if (k != "scale") set_key(cfg, k, v);
}

std::string render_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& d : registry()) {
        out += d.name;
        out += " = ";
        out += d.get(cfg);
        out += '\n';
    }
    return out;
}

RunConfig default_config(eval::ScalePreset scale) {
    RunConfig cfg;
    set_key(cfg, "scale", eval::scale_name(scale));
    return cfg;
}

}  // namespace d3fl::config
