#pragma once

// Exact and heuristic solvers over (partition boundaries, per-layer bits):
//  - brute_force_oracle: exhaustive reference for small instances
//  - solve_ilp: exact branch-and-bound with admissible optimistic bounds and
//    a wall-clock limit (returns the incumbent flagged non-optimal on expiry)
//  - adabits: quality-only start (highest bits that fit, contiguity + memory)
//  - bitwidth_transfer: straggler-driven improvement over precision/layer
//    exchanges between stages
//  - export_lp: emit the integer program in CPLEX LP text format

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetplan/optimizer/instance.hpp"

namespace hetplan::optimizer {

struct solve_options {
    double time_limit_s = 60.0;
    // warm start; ignored unless it is feasible for the instance
    std::optional<plan_candidate> incumbent;
};

struct solve_result {
    plan_candidate best;       // feasible == false when nothing fits
    bool optimal = false;      // proven optimal (no time-limit cut)
    std::int64_t nodes = 0;    // search nodes expanded
    double elapsed_s = 0.0;
};

struct oracle_stats {
    std::int64_t partitions = 0;
    std::int64_t bit_vectors_per_partition = 0;
    std::int64_t candidates = 0;
};

// Exhaustive search; guarded to L <= 8, N <= 3, |bits| <= 3 (throws
// std::invalid_argument beyond that).
plan_candidate brute_force_oracle(const ilp_instance& inst,
                                  oracle_stats* stats = nullptr);

solve_result solve_ilp(const ilp_instance& inst, const solve_options& opt = {});

// Minimize the quality indicator sum alone subject to memory/support/
// contiguity (theta deliberately excluded so theta == 0 stays meaningful).
solve_result adabits(const ilp_instance& inst, const solve_options& opt = {});

// One transformation rule: exchange `nums` layers at bit_st on the straggler
// against one layer at bit_pi on a partner stage (layer counts flow through
// the intervening boundaries so contiguity is preserved).
struct transfer_rule {
    int bit_st = 0;
    int bit_pi = 0;
    int nums = 1;
};

std::vector<transfer_rule> default_transfer_rules();

// Apply best-improvement moves until a fixed point. The result is never
// worse than `start`; if `start` is infeasible it is returned unchanged.
plan_candidate bitwidth_transfer(
    const ilp_instance& inst, const plan_candidate& start,
    const std::vector<transfer_rule>& rules = default_transfer_rules(),
    int max_rounds = 1000);

std::string export_lp(const ilp_instance& inst);

}  // namespace hetplan::optimizer
