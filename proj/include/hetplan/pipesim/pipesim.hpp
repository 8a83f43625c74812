#pragma once

// Discrete-event simulator for two-phase (prefill + decode) pipeline serving.
//
// Semantics:
//  - ceil(B/eta) prefill micro-batches flow through the stages in order;
//    a stage runs one unit at a time, FIFO by (ready time, kind, ids).
//  - prefill batches are partitioned into ceil(B/xi) decode groups; a group
//    becomes ready when ALL of its member prefill batches leave the last
//    stage (request concatenation itself is free).
//  - decode is autoregressive per group: token t enters stage 0 only after
//    token t-1 of the same group leaves the last stage; different groups
//    interleave freely. Each request emits gen_len - 1 decode tokens (the
//    first token comes out of prefill).
//  - each stage boundary is a channel that moves one transfer at a time,
//    overlapped with compute; ragged tail batches reuse the full-size cost.

#include <cstdint>
#include <string>
#include <vector>

namespace hetplan::pipesim {

struct stage_cost {
    double pre_s = 0.0;       // prefill compute per micro-batch
    double dec_s = 0.0;       // decode compute per token per micro-batch
    double comm_pre_s = 0.0;  // prefill activation transfer to next stage
    double comm_dec_s = 0.0;  // decode activation transfer to next stage
    // optional linear-in-token decode cost: token t (1-based) computes in
    // max(0, dec_s + dec_slope_s * (t - gen_len/2)); 0 keeps the flat
    // half-horizon cost the planner assumes
    double dec_slope_s = 0.0;
};

struct microbatch_schedule {
    int global_bz = 0;
    int eta = 0;
    int xi = 0;
    std::vector<int> prefill_sizes;       // ceil(B/eta) entries
    std::vector<int> group_of_prefill;    // decode group per prefill batch
    int num_groups = 0;                   // ceil(B/xi)
};

microbatch_schedule make_schedule(int global_bz, int eta, int xi);

enum class unit_kind { prefill, decode };

struct timeline_event {
    int stage = 0;
    unit_kind kind = unit_kind::prefill;
    int index = 0;  // prefill batch index or decode group index
    int token = 0;  // 0 for prefill, else 1-based decode step
    double start = 0.0;
    double end = 0.0;
};

struct sim_report {
    double makespan_s = 0.0;
    std::vector<double> stage_busy_s;  // compute occupancy per stage
    double bubble_fraction = 0.0;      // 1 - busy / (stages * makespan)
    std::vector<timeline_event> timeline;
};

// Run the discrete-event simulation; `gen_len` is n (tokens per request).
sim_report simulate(const std::vector<stage_cost>& stages,
                    const microbatch_schedule& sched, int gen_len,
                    bool keep_timeline = false);

// The planner's closed-form latency for the same inputs:
//   ceil(B/eta - 1)*max_j max(pre_j, comm_pre_j)
// + ceil(B/xi - 1)*(n-1)*max_j max(dec_j, comm_dec_j)
// + sum_j pre_j + sum_j dec_j
double analytic_latency(const std::vector<stage_cost>& stages, int global_bz,
                        int eta, int xi, int gen_len);

// Serialize a report (JSON document with format_version; timeline stays
// separate as CSV because it can be large).
std::string serialize_report(const sim_report& r, double analytic_s);
std::string timeline_csv(const sim_report& r);

}  // namespace hetplan::pipesim
