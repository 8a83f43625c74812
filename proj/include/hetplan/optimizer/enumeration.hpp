#pragma once

// Outer-loop enumerations of the planner: device orderings, micro-batch
// size pairs, and layer grouping (coarsening) of instances.

#include <utility>
#include <vector>

#include "hetplan/optimizer/instance.hpp"

namespace hetplan::optimizer {

// Distinct permutations of the device multiset (devices with identical name,
// memory, bandwidth and bit support are interchangeable), lexicographically
// ordered by first-occurrence type index, truncated at `cap`. Each entry is a
// device-index order into cluster.devices.
std::vector<std::vector<int>> enumerate_orderings(const cluster_spec& cluster,
                                                  int cap = 720);

// Candidate (eta, xi) pairs: xi = ceil(B/N) plus every divisor of B in
// [ceil(B/N), B]; eta ranges over [1, xi]. Sorted ascending by (xi, eta).
std::vector<std::pair<int, int>> enumerate_microbatch_pairs(int global_bz,
                                                            int num_devices);

// Coarsen an instance by fusing consecutive runs of `g` layers (the last
// group may be smaller): latency/memory/quality add up, one bit per group.
struct grouped_instance {
    ilp_instance inst;            // group-level instance
    std::vector<int> group_size;  // layers per group
};

grouped_instance group_layers(const ilp_instance& inst, int g);

// Expand a group-level candidate back to layer space (boundaries in layers,
// group bit replicated over members).
plan_candidate expand_candidate(const plan_candidate& grouped,
                                const std::vector<int>& group_size);

}  // namespace hetplan::optimizer
