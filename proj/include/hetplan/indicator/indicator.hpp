#pragma once

// Quantization quality indicator: a per-layer, per-bitwidth scalar that
// upper-bounds (deterministic rounding) or equals (stochastic rounding) the
// output variance added by quantizing the layer's weights, accumulated over
// the layer's quantized operators:
//
//   omega(layer, b) = sum_ops  D_W * S_W(b)^2 * G(X)
//
// with S_W the quantization step for the operator's weight range at b bits
// and G(X) = Var[X]/4 (round-to-nearest) or (E[X]^2 + Var[X])/6 (stochastic
// rounding). 16-bit is the unquantized reference: omega(layer, 16) = 0.

#include <cstdint>
#include <string>
#include <vector>

#include "hetplan/types.hpp"

namespace hetplan::indicator {

enum class quant_scheme { asymmetric, symmetric };
enum class rounding_mode { nearest, stochastic };

struct quantizer_spec {
    quant_scheme scheme = quant_scheme::symmetric;
    rounding_mode rounding = rounding_mode::nearest;
};

// Calibration statistics for one quantized operator inside a layer.
struct operator_stats {
    std::string op;          // e.g. "qkv", "out", "fc1", "fc2"
    std::int64_t d_w = 0;    // weight element count
    double w_min = 0.0;
    double w_max = 0.0;
    double x_mean = 0.0;     // input activation mean (calibration)
    double x_var = 0.0;      // input activation variance
};

using layer_stats = std::vector<operator_stats>;

// omega values indexed [layer][bit index], bits sorted ascending.
struct indicator_table {
    bitwidth_set bits;
    std::vector<std::vector<double>> omega;
    int num_layers() const { return static_cast<int>(omega.size()); }
    double at(int layer, int bit) const;
};

// Quantization step size for a weight range at `bit` bits.
// asymmetric: (w_max - w_min) / (2^bit - 1)
// symmetric:  max(|w_max|, |w_min|) / (2^(bit-1) - 1)
// Throws std::invalid_argument if bit < 2 (symmetric denominator vanishes at
// 1) or the range is inverted.
double scaling_factor(double w_min, double w_max, int bit, quant_scheme scheme);

// Input-side factor of the indicator. Throws on negative variance.
double g_of_x(double x_mean, double x_var, rounding_mode rounding);

// Indicator for one layer at one bitwidth (0 when bit == 16).
double layer_indicator(const layer_stats& ops, int bit,
                       const quantizer_spec& q);

indicator_table build_indicator_table(const std::vector<layer_stats>& layers,
                                      const bitwidth_set& bits,
                                      const quantizer_spec& q);

// ---- calibration stats / table serialization -----------------------------

// CSV with header layer,operator,d_w,w_min,w_max,x_mean,x_var. Layers must
// form a contiguous 0-based range.
std::vector<layer_stats> parse_layer_stats(const std::string& csv_text);

// CSV with header layer,bit_<b1>,bit_<b2>,... one row per layer.
std::string serialize_indicator_table(const indicator_table& t);
indicator_table parse_indicator_table(const std::string& csv_text);

// ---- Monte-Carlo oracle ---------------------------------------------------

// Empirical variance of a quantized dot product y = (W + err)·X with X drawn
// i.i.d. Normal(x_mean, x_var) per element, quantizing `weights` to `bit`
// bits (16 = no-op). Reports the total output variance and the variance of
// the perturbation (err)·X measured from the same draws, plus a standard
// error estimate for the total (from the sample's fourth moment).
struct mc_variance {
    double total_var = 0.0;   // Var[(W~)·X]
    double extra_var = 0.0;   // Var[(W~ - W)·X]
    double se_total = 0.0;    // standard error of total_var
    std::int64_t n = 0;
};

mc_variance mc_output_variance(const std::vector<double>& weights,
                               double x_mean, double x_var, int bit,
                               const quantizer_spec& q, std::int64_t n_samples,
                               std::uint64_t seed);

// Exact unquantized output variance for the same input model: Var[W·X].
double exact_base_variance(const std::vector<double>& weights, double x_var);

}  // namespace hetplan::indicator
