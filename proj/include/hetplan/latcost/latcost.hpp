#pragma once

// Profiled-latency regression: per-(device, bitwidth, phase) linear models on
// hand-picked workload features, fit by ordinary least squares.
//
//   prefill(v, s)  ~ c0 + c1*v + c2*s + c3*v*s + c4*v*s^2
//   decode(v, s, t) ~ c0 + c1*v + c2*v*(t+s) + c3*(t+s)
//
// v = micro-batch size, s = prompt length, t = tokens generated so far.
// Predictions clamp at zero; per-layer shard latency sums layer predictions
// with decode evaluated at the half-horizon token t = n/2.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "hetplan/types.hpp"

namespace hetplan::latcost {

enum class phase { prefill, decode };

inline constexpr int prefill_feature_count = 5;
inline constexpr int decode_feature_count = 4;
inline constexpr int latency_model_format_version = 1;

struct profile_sample {
    std::string device;
    int bit = 16;
    phase ph = phase::prefill;
    int v = 1;
    int s = 0;
    int t = 0;  // zero for prefill rows
    double latency_s = 0.0;
};

struct residual_stats {
    double max_abs = 0.0;
    double mean_abs = 0.0;
    double rmse = 0.0;
    int n = 0;
};

struct group_key {
    std::string device;
    int bit = 16;
    phase ph = phase::prefill;
    bool operator<(const group_key& o) const {
        return std::tie(device, bit, ph) < std::tie(o.device, o.bit, o.ph);
    }
};

struct latency_model {
    // coefficient vectors per group; size 5 for prefill groups, 4 for decode
    std::map<group_key, std::vector<double>> coeffs;
    std::map<group_key, residual_stats> residuals;

    bool has_group(const std::string& device, int bit, phase ph) const;
};

// Feature expansions (exposed for tests and synthetic data generation).
std::array<double, prefill_feature_count> prefill_features(double v, double s);
std::array<double, decode_feature_count> decode_features(double v, double s,
                                                         double t);

// Parse profile CSV text with header device,bit,phase,v,s,t,latency_s.
// Rows sharing (device,bit,phase,v,s,t) are averaged. Throws
// std::invalid_argument on malformed rows or nonpositive latency.
std::vector<profile_sample> ingest_profile(const std::string& csv_text);

// Least-squares fit per group. Throws std::runtime_error naming the group if
// it has fewer distinct samples than features or a rank-deficient design.
latency_model fit(const std::vector<profile_sample>& samples);

// Predictions (clamped at zero). Throw std::runtime_error for unknown groups.
double predict_prefill(const latency_model& m, const std::string& device,
                       int bit, double v, double s);
double predict_decode(const latency_model& m, const std::string& device,
                      int bit, double v, double s, double t);

// Sum of per-layer predictions for a contiguous shard, decode at t = n/2.
double shard_latency(const latency_model& m, const std::string& device,
                     const std::vector<int>& layer_bits, phase ph, double v,
                     double s, double n);

// JSON round trip for fitted models.
std::string serialize_model(const latency_model& m);
latency_model parse_model(const std::string& text);

}  // namespace hetplan::latcost
