#pragma once

// Core value types shared by every module: model/device/cluster descriptions,
// workload shape, bitwidth sets, serving plans and objective breakdowns.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetplan {

// Thrown when a requested plan/instance cannot satisfy memory or structural
// constraints (maps to a dedicated process exit code in the CLI).
struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class norm_kind {
    standard,  // two-parameter layer norm (gain + bias), 3 norms per block
    rms        // gain only
};

// Transformer decoder shape. All counts are per the usual conventions:
// h1 = hidden size, h2 = feed-forward inner size, d_t = token embedding dim,
// d_p = positional embedding dim, pos_s = positional table rows.
struct model_spec {
    std::string name;
    int num_layers = 0;
    std::int64_t h1 = 0;
    std::int64_t h2 = 0;
    int num_heads = 0;
    std::int64_t vocab_s = 0;
    std::int64_t pos_s = 0;
    std::int64_t d_t = 0;
    std::int64_t d_p = 0;
    norm_kind norm = norm_kind::standard;
};

// One accelerator. supported_bits empty means "supports every global bit".
struct device_spec {
    std::string name;
    std::int64_t mem_bytes = 0;            // usable HBM/DRAM budget
    double link_bw_bytes_per_s = 0.0;      // bandwidth to the next stage
    std::vector<int> supported_bits;       // sorted ascending
};

struct cluster_spec {
    std::vector<device_spec> devices;
    // optional symmetric pairwise bandwidth matrix (bytes/s); empty if unused
    std::vector<std::vector<double>> pairwise_bw;
};

struct workload {
    int global_bz = 0;   // B: requests per serving round
    int prompt_len = 0;  // s
    int gen_len = 0;     // n: tokens generated per request
};

// Sorted set of candidate weight bitwidths; must contain the 16-bit
// reference precision.
using bitwidth_set = std::vector<int>;

// Additive decomposition of the plan objective:
//   total = ceil(B/eta - 1) * t_max_pre
//         + ceil(B/xi  - 1) * (n - 1) * t_max_dec
//         + t_pre_total + t_dec_total + theta * omega_sum
struct objective_breakdown {
    double t_max_pre = 0.0;   // slowest prefill stage (compute or link floor)
    double t_max_dec = 0.0;   // slowest decode stage
    double t_pre_total = 0.0; // sum of per-stage prefill compute
    double t_dec_total = 0.0; // sum of per-stage decode compute
    double omega_sum = 0.0;   // unweighted quality indicator sum
    double theta = 0.0;
    double total = 0.0;
};

// Contiguous slice of layers served by one device.
struct stage_range {
    int device = 0;  // index into plan.device_order
    int begin = 0;   // first layer (inclusive)
    int end = 0;     // one past last layer
};

struct plan {
    std::vector<int> device_order;    // permutation of cluster device indices
    std::vector<stage_range> stages;  // one entry per pipeline stage, in order
    std::vector<int> layer_bits;      // bitwidth per layer, size L
    int eta = 0;                      // prefill micro-batch size
    int xi = 0;                       // decode micro-batch size
    objective_breakdown objective;
    bool optimal = true;              // false if a time limit cut the search
};

// ---- small helpers -------------------------------------------------------

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
    return (a + b - 1) / b;
}

// bubble counts of the two-phase pipeline: ceil(B/u - 1) micro-batch waves
inline std::int64_t bubble_count(int global_bz, int micro_bz) {
    return ceil_div(static_cast<std::int64_t>(global_bz) - micro_bz, micro_bz);
}

// Recompose the objective total from its parts (workload context supplies the
// bubble multipliers). Used by validation and tests.
double recompose_objective(const objective_breakdown& parts, int global_bz,
                           int eta, int xi, int gen_len);

// ---- validation ----------------------------------------------------------

void validate_model(const model_spec& m);
void validate_cluster(const cluster_spec& c);
void validate_workload(const workload& w);
void validate_bits(const bitwidth_set& bits);

// Structural checks for a finished plan: device_order is a permutation,
// stages cover [0, num_layers) contiguously in order, every stage nonempty,
// bits are members of `bits`, 1 <= eta <= xi <= B, and the stored objective
// total recomposes from its parts to 1e-12 relative.
void validate_plan(const plan& p, int num_layers, const workload& w,
                   const bitwidth_set& bits, int num_devices);

}  // namespace hetplan
