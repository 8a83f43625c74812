#include "hetplan/optimizer/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace hetplan::optimizer {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct subproblem_result {
    plan_candidate cand;       // layer-level
    ilp_instance inst;         // layer-level instance it was solved against
    std::vector<int> order;
    int ordering_index = -1;
    int eta = 0, xi = 0;
    bool optimal = true;
};

// preference fold across subproblems: candidate order first, then
// (ordering index, eta, xi) lexicographically
bool subproblem_better(const subproblem_result& a, const subproblem_result& b) {
    if (a.cand.feasible != b.cand.feasible) return a.cand.feasible;
    if (!a.cand.feasible) return false;
    if (a.cand.objective != b.cand.objective)
        return a.cand.objective < b.cand.objective;
    const int ta = a.cand.total_bits(a.inst), tb = b.cand.total_bits(b.inst);
    if (ta != tb) return ta > tb;
    return std::tie(a.ordering_index, a.eta, a.xi) <
           std::tie(b.ordering_index, b.eta, b.xi);
}

plan_search_result finish_search(const subproblem_result& win, bool feasible,
                                 bool all_optimal, bool timed_out,
                                 int orderings, int pairs, double elapsed) {
    plan_search_result res;
    res.feasible = feasible;
    res.optimal = feasible && all_optimal;
    res.timed_out = timed_out;
    res.orderings_tried = orderings;
    res.pairs_tried = pairs;
    res.elapsed_s = elapsed;
    if (feasible) {
        res.best = candidate_to_plan(win.inst, win.order, win.cand);
        res.best.optimal = all_optimal;
        res.ordering_index = win.ordering_index;
    }
    return res;
}

}  // namespace

plan candidate_to_plan(const ilp_instance& inst,
                       const std::vector<int>& device_order,
                       const plan_candidate& cand) {
    plan p;
    p.device_order = device_order;
    p.eta = inst.eta;
    p.xi = inst.xi;
    p.optimal = cand.optimal;
    int begin = 0;
    for (size_t j = 0; j < cand.boundaries.size(); ++j) {
        p.stages.push_back({static_cast<int>(j), begin, cand.boundaries[j]});
        begin = cand.boundaries[j];
    }
    for (int bi : cand.bit_idx) p.layer_bits.push_back(inst.bits[bi]);
    p.objective = evaluate(inst, cand.boundaries, cand.bit_idx);
    return p;
}

plan_search_result best_plan(const model_spec& model,
                             const cluster_spec& cluster, const workload& load,
                             const bitwidth_set& bits,
                             const latcost::latency_model& lat,
                             const indicator::indicator_table& omega,
                             const plan_options& opt) {
    const auto t0 = clock_type::now();
    const auto orderings = enumerate_orderings(cluster, opt.ordering_cap);
    const auto pairs = enumerate_microbatch_pairs(
        load.global_bz, static_cast<int>(cluster.devices.size()));

    subproblem_result win;
    bool feasible = false;
    bool all_optimal = true;
    bool timed_out = false;

    for (int oi = 0; oi < static_cast<int>(orderings.size()); ++oi) {
        // previous winner reused as a warm start across micro-batch pairs
        std::optional<plan_candidate> carry;
        for (const auto& [eta, xi] : pairs) {
            instance_inputs in;
            in.model = model;
            in.cluster = cluster;
            in.device_order = orderings[oi];
            in.load = load;
            in.bits = bits;
            in.lat = lat;
            in.omega = omega;
            in.theta = opt.theta;
            in.eta = eta;
            in.xi = xi;
            in.bit_kv = opt.bit_kv;
            in.alpha = opt.alpha;
            ilp_instance inst = build_instance(in);

            grouped_instance gi = group_layers(inst, opt.group);

            solve_options sopt;
            sopt.time_limit_s = opt.time_limit_s;
            solve_result quality = adabits(gi.inst, sopt);
            if (!quality.optimal) timed_out = true;
            plan_candidate seed;
            if (quality.best.feasible)
                seed = bitwidth_transfer(gi.inst, quality.best);

            // warm start = better of (quality seed, carried previous winner),
            // both re-scored against the instance at hand
            auto offer = [&](plan_candidate c) {
                c.feasible = memory_ok(gi.inst, c.boundaries, c.bit_idx);
                if (!c.feasible) return;
                c.objective =
                    evaluate(gi.inst, c.boundaries, c.bit_idx).total;
                if (!sopt.incumbent ||
                    candidate_better(gi.inst, c, *sopt.incumbent))
                    sopt.incumbent = std::move(c);
            };
            if (seed.feasible) offer(seed);
            if (carry) offer(*carry);

            subproblem_result sub;
            sub.order = orderings[oi];
            sub.ordering_index = oi;
            sub.eta = eta;
            sub.xi = xi;
            if (opt.heuristic) {
                sub.cand = expand_candidate(seed, gi.group_size);
                sub.optimal = false;
            } else {
                solve_result solved = solve_ilp(gi.inst, sopt);
                sub.optimal = solved.optimal;
                if (!solved.optimal) timed_out = true;
                sub.cand = expand_candidate(solved.best, gi.group_size);
                if (solved.best.feasible) carry = solved.best;
            }
            if (!sub.optimal && !opt.heuristic) all_optimal = false;
            if (sub.cand.feasible) {
                // exact objective at layer level (identical by linearity, but
                // recomputed so downstream consumers see one source of truth)
                sub.cand.objective =
                    evaluate(inst, sub.cand.boundaries, sub.cand.bit_idx).total;
                sub.inst = std::move(inst);
                if (!feasible || subproblem_better(sub, win)) {
                    win = std::move(sub);
                    feasible = true;
                }
            }
        }
    }
    return finish_search(win, feasible, !opt.heuristic && all_optimal,
                         timed_out, static_cast<int>(orderings.size()),
                         static_cast<int>(pairs.size()), seconds_since(t0));
}

namespace {

// shared scaffolding of the two baselines: identity order + single precision
plan_search_result single_precision_baseline(
    const model_spec& model, const cluster_spec& cluster, const workload& load,
    const bitwidth_set& bits, const latcost::latency_model& lat,
    const indicator::indicator_table& omega, const plan_options& opt,
    bool even_partition) {
    const auto t0 = clock_type::now();
    const int N = static_cast<int>(cluster.devices.size());
    std::vector<int> order(N);
    for (int j = 0; j < N; ++j) order[j] = j;

    const auto pairs = enumerate_microbatch_pairs(load.global_bz, N);
    const int even_mb = static_cast<int>(ceil_div(load.global_bz, N));

    subproblem_result win;
    bool feasible = false;
    bool timed_out = false;

    // highest precision first; stop at the first feasible one
    for (auto bit_it = bits.rbegin(); bit_it != bits.rend() && !feasible;
         ++bit_it) {
        const int bit = *bit_it;
        for (const auto& [eta, xi] : pairs) {
            if (!even_partition && (eta != even_mb || xi != even_mb)) continue;
            instance_inputs in;
            in.model = model;
            in.cluster = cluster;
            in.device_order = order;
            in.load = load;
            in.bits = bits;
            in.lat = lat;
            in.omega = omega;
            in.theta = 0.0;
            in.eta = eta;
            in.xi = xi;
            in.bit_kv = opt.bit_kv;
            in.alpha = opt.alpha;
            ilp_instance inst = build_instance(in);
            // restrict every device to the single precision under test
            const int bi = static_cast<int>(
                std::find(bits.begin(), bits.end(), bit) - bits.begin());
            for (auto& d : inst.devices) {
                std::vector<char> mask(bits.size(), 0);
                if (d.bit_ok[bi]) mask[bi] = 1;
                d.bit_ok = std::move(mask);
            }

            plan_candidate cand;
            if (even_partition) {
                // layer counts as equal as possible, remainder to the front
                const int L = model.num_layers;
                std::vector<int> bounds;
                int cursor = 0;
                for (int j = 0; j < N; ++j) {
                    cursor += L / N + (j < L % N ? 1 : 0);
                    bounds.push_back(cursor);
                }
                if (bounds.back() != L || L < N) continue;
                cand.boundaries = std::move(bounds);
                cand.bit_idx.assign(L, bi);
                bool support_ok = true;
                for (const auto& d : inst.devices)
                    if (!d.bit_ok[bi]) support_ok = false;
                cand.feasible =
                    support_ok && memory_ok(inst, cand.boundaries, cand.bit_idx);
                if (!cand.feasible) continue;
                cand.objective =
                    evaluate(inst, cand.boundaries, cand.bit_idx).total;
            } else {
                solve_options sopt;
                sopt.time_limit_s = opt.time_limit_s;
                solve_result solved = solve_ilp(inst, sopt);
                if (!solved.optimal) timed_out = true;
                if (!solved.best.feasible) continue;
                cand = solved.best;
            }

            subproblem_result sub;
            sub.cand = std::move(cand);
            sub.inst = std::move(inst);
            sub.order = order;
            sub.ordering_index = 0;
            sub.eta = eta;
            sub.xi = xi;
            if (!feasible || subproblem_better(sub, win)) {
                win = std::move(sub);
                feasible = true;
            }
        }
    }
    return finish_search(win, feasible, feasible && !timed_out, timed_out,
                         feasible ? 1 : 0, static_cast<int>(pairs.size()),
                         seconds_since(t0));
}

}  // namespace

plan_search_result uniform_baseline(const model_spec& model,
                                    const cluster_spec& cluster,
                                    const workload& load,
                                    const bitwidth_set& bits,
                                    const latcost::latency_model& lat,
                                    const indicator::indicator_table& omega,
                                    const plan_options& opt) {
    return single_precision_baseline(model, cluster, load, bits, lat, omega,
                                     opt, /*even_partition=*/true);
}

plan_search_result pipeedge_baseline(const model_spec& model,
                                     const cluster_spec& cluster,
                                     const workload& load,
                                     const bitwidth_set& bits,
                                     const latcost::latency_model& lat,
                                     const indicator::indicator_table& omega,
                                     const plan_options& opt) {
    return single_precision_baseline(model, cluster, load, bits, lat, omega,
                                     opt, /*even_partition=*/false);
}

}  // namespace hetplan::optimizer
