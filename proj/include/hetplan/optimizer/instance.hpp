#pragma once

// Solver-facing problem instance: an ordered device pipeline plus dense
// per-layer/per-device/per-bit latency, memory and quality tables, with the
// workload and micro-batch context needed to evaluate the serving objective
//
//   ceil(B/eta - 1) * Tmax_pre + ceil(B/xi - 1) * (n-1) * Tmax_dec
//   + sum_j Tpre_j + sum_j Tdec_j + theta * sum_i omega_i(b_i)
//
// where Tmax_phase = max_j max(compute_j, link floor_j) (activation
// transfers overlap compute; a stage can never beat its link).

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hetplan/indicator/indicator.hpp"
#include "hetplan/latcost/latcost.hpp"
#include "hetplan/types.hpp"

namespace hetplan::optimizer {

struct stage_device {
    std::string name;
    std::int64_t mem_budget = 0;   // capacity minus transient activation peak
    std::vector<char> bit_ok;      // per bit index: usable on this device
    double comm_pre_s = 0.0;       // prefill activation transfer / link bw
    double comm_dec_s = 0.0;       // decode activation transfer / link bw
};

struct ilp_instance {
    bitwidth_set bits;                  // sorted ascending, contains 16
    std::vector<stage_device> devices;  // pipeline order
    // latencies in seconds, indexed [layer][device][bit index]
    std::vector<std::vector<std::vector<double>>> lat_pre;
    std::vector<std::vector<std::vector<double>>> lat_dec;
    std::vector<std::vector<std::int64_t>> mem;  // [layer][bit index], bytes
    std::vector<std::vector<double>> omega;      // [layer][bit index]
    std::int64_t embed_bytes = 0;  // charged to the first stage
    double theta = 0.0;
    int global_bz = 0;
    int eta = 0;
    int xi = 0;
    int gen_len = 0;

    int num_layers() const { return static_cast<int>(mem.size()); }
    int num_devices() const { return static_cast<int>(devices.size()); }
    int num_bits() const { return static_cast<int>(bits.size()); }
    // structural sanity (table shapes, invariants); throws invalid_argument
    void validate() const;
};

// A (partition, bit assignment) pair under evaluation. `boundaries[j]` is one
// past the last layer of stage j (boundaries.back() == L); `bit_idx[i]`
// indexes into instance.bits.
struct plan_candidate {
    std::vector<int> boundaries;
    std::vector<int> bit_idx;
    double objective = std::numeric_limits<double>::infinity();
    bool feasible = false;
    bool optimal = true;
    int total_bits(const ilp_instance& inst) const;
};

// Per-stage view used by reports and the improvement heuristic.
struct stage_metrics {
    double t_pre = 0.0;
    double t_dec = 0.0;
    double comm_pre = 0.0;
    double comm_dec = 0.0;
    std::int64_t mem_used = 0;
    std::int64_t mem_budget = 0;
    // the stage's additive footprint in the objective
    double load = 0.0;
};

// True iff every stage fits its memory budget (embeddings charged to stage
// 0); fills per-stage usage when `out` is nonnull.
bool memory_ok(const ilp_instance& inst, const std::vector<int>& boundaries,
               const std::vector<int>& bit_idx,
               std::vector<std::int64_t>* out = nullptr);

// Evaluate the objective of a structurally valid candidate (does not check
// memory; combine with memory_ok).
objective_breakdown evaluate(const ilp_instance& inst,
                             const std::vector<int>& boundaries,
                             const std::vector<int>& bit_idx);

std::vector<stage_metrics> per_stage_metrics(const ilp_instance& inst,
                                             const std::vector<int>& boundaries,
                                             const std::vector<int>& bit_idx);

// Deterministic preference order between evaluated candidates: lower
// objective, then larger total bit count, then lexicographically smaller
// (boundaries, bit_idx). Returns true if `a` is strictly preferred over `b`.
bool candidate_better(const ilp_instance& inst, const plan_candidate& a,
                      const plan_candidate& b);

// ---- instance construction -------------------------------------------------

struct instance_inputs {
    model_spec model;
    cluster_spec cluster;
    std::vector<int> device_order;  // permutation of cluster indices
    workload load;
    bitwidth_set bits;
    latcost::latency_model lat;
    indicator::indicator_table omega;
    double theta = 0.0;
    int eta = 1;
    int xi = 1;
    int bit_kv = 16;
    double alpha = 2.0;  // transient-peak safety multiplier
};

// Assemble the dense tables from the cost models: latencies at v = eta
// (prefill) and v = xi, t = n/2 (decode), per-layer memory as weights + full
// batch KV, device budgets with the transient peak pre-subtracted, link
// floors from 2*eta*s*h1 (prefill) and 2*xi*h1 (decode) bytes per boundary.
ilp_instance build_instance(const instance_inputs& in);

}  // namespace hetplan::optimizer
