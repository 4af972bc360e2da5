#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "d3fl/detrend.hpp"
#include "d3fl/eval.hpp"
#include "d3fl/federation.hpp"
#include "d3fl/ingest.hpp"
#include "d3fl/synth.hpp"

namespace d3fl::config {

// Everything a run can tune, addressable through flat namespaced keys
// (synth.*, detrend.*, model.*, fed.*, eval.*, ingest.*, plus the globals
// seed, scale and jobs). Resolution order: struct defaults, then the scale
// preset, then the config file, then command-line flags.
struct RunConfig {
    eval::ScalePreset scale = eval::ScalePreset::desk;
    synth::Regime regime = synth::Regime::gev;
    detrend::DetrendTechnique technique;
    int n_clients = 10;
    synth::SynthConfig synth_cfg;
    fed::FederationConfig fed_cfg;
    ingest::IngestConfig ingest_cfg;
};

struct KeyInfo {
    std::string_view name;
    std::string_view summary;
};

// every accepted key, sorted by name (for --help and validation)
const std::vector<KeyInfo>& key_registry();

// Applies one key. Unknown keys and unparseable values raise
// std::invalid_argument naming the offending token. Setting `scale` applies
// the whole preset.
void set_key(RunConfig& cfg, std::string_view key, std::string_view value);

std::string get_key(const RunConfig& cfg, std::string_view key);

// Line-oriented `key = value` text: one pair per line, '#' starts a comment,
// blank lines ignored. Returns the pairs in file order; grammar violations
// raise std::invalid_argument with the line number.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// Applies a parsed file: any `scale` line first (the preset), then the
// remaining keys in order, matching the resolution order above.
void load_config_file(RunConfig& cfg, const std::string& path);

// canonical echo of every key, one `key = value` line, sorted; reloading the
// text reproduces the config byte for byte
std::string render_config(const RunConfig& cfg);

// constructs defaults with the given preset already applied
RunConfig default_config(eval::ScalePreset scale);

}  // namespace d3fl::config
