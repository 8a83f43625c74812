#pragma once

// Parsing/serialization of the run configuration document (JSON text with
// `model`, `cluster`, `workload` and `bits` sections) and model presets.

#include <optional>
#include <string>

#include "hetplan/types.hpp"

namespace hetplan {

inline constexpr int config_format_version = 1;

struct run_setup {
    model_spec model;
    cluster_spec cluster;
    workload load;
    bitwidth_set bits;
};

// Known decoder-stack shapes addressable by name ("opt-13b", "opt-30b",
// "opt-66b", "bloom-176b", "tiny-test"). Throws std::invalid_argument for
// unknown names.
model_spec model_preset(const std::string& name);
bool has_model_preset(const std::string& name);

// Parse the full config document. The model section is either
// {"preset": "<name>"} or the explicit field set. Devices without
// supported_bits inherit the global bit set. Throws std::invalid_argument on
// malformed text, nonpositive capacities/bandwidths or unknown bitwidths.
run_setup parse_config(const std::string& text);

// Cluster-only helpers (round-trip safe: parse_cluster(serialize_cluster(c))
// preserves every field).
cluster_spec parse_cluster(const std::string& text);
std::string serialize_cluster(const cluster_spec& c);

std::string serialize_config(const run_setup& rs);

}  // namespace hetplan
