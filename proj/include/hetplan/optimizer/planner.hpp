#pragma once

// Top-level plan search: for every candidate device ordering and micro-batch
// pair, build an instance (optionally layer-grouped), solve it, and keep the
// best candidate under the deterministic preference order. Also hosts the
// two reference baselines used for comparisons.

#include <string>
#include <vector>

#include "hetplan/optimizer/enumeration.hpp"
#include "hetplan/optimizer/instance.hpp"
#include "hetplan/optimizer/solver.hpp"

namespace hetplan::optimizer {

struct plan_options {
    double theta = 0.0;
    int group = 1;               // layer-group size g
    bool heuristic = false;      // quality start + transfer only (no exact BB)
    double time_limit_s = 60.0;  // per exact solve
    int ordering_cap = 720;
    int bit_kv = 16;
    double alpha = 2.0;
};

struct plan_search_result {
    bool feasible = false;
    bool optimal = false;    // every solve proved optimal and none timed out
    bool timed_out = false;  // some solve hit its wall-clock limit
    plan best;               // valid only when feasible
    int ordering_index = -1;
    int orderings_tried = 0;
    int pairs_tried = 0;
    double elapsed_s = 0.0;
};

plan_search_result best_plan(const model_spec& model,
                             const cluster_spec& cluster, const workload& load,
                             const bitwidth_set& bits,
                             const latcost::latency_model& lat,
                             const indicator::indicator_table& omega,
                             const plan_options& opt);

// Baseline 1: identity device order, layer counts split as evenly as
// possible, one global precision (the highest that fits), micro-batch pair
// chosen by best analytic latency at theta = 0.
plan_search_result uniform_baseline(const model_spec& model,
                                    const cluster_spec& cluster,
                                    const workload& load,
                                    const bitwidth_set& bits,
                                    const latcost::latency_model& lat,
                                    const indicator::indicator_table& omega,
                                    const plan_options& opt);

// Baseline 2: identity order, eta = xi = ceil(B/N), one global precision
// (highest feasible), heterogeneity-aware partition from the exact solver
// restricted to that precision at theta = 0.
plan_search_result pipeedge_baseline(const model_spec& model,
                                     const cluster_spec& cluster,
                                     const workload& load,
                                     const bitwidth_set& bits,
                                     const latcost::latency_model& lat,
                                     const indicator::indicator_table& omega,
                                     const plan_options& opt);

// Convert a winning candidate into a user-facing plan (layer bits, stage
// ranges, recomputed objective breakdown).
plan candidate_to_plan(const ilp_instance& inst,
                       const std::vector<int>& device_order,
                       const plan_candidate& cand);

}  // namespace hetplan::optimizer
