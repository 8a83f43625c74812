#include "hetplan/optimizer/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

namespace hetplan::optimizer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Reusable enumeration of contiguous partitions: boundaries[j] is one past
// stage j's last layer; every stage nonempty; boundaries.back() == L.
template <typename Fn>
void for_each_partition(int L, int N, Fn&& fn) {
    std::vector<int> bounds(N);
    bounds[N - 1] = L;
    // choose N-1 strictly increasing cut points in [1, L-1]
    std::vector<int> cuts(N - 1);
    for (int k = 0; k < N - 1; ++k) cuts[k] = k + 1;
    if (N == 1) {
        fn(bounds);
        return;
    }
    if (L < N) return;
    while (true) {
        for (int k = 0; k < N - 1; ++k) bounds[k] = cuts[k];
        fn(bounds);
        // advance the combination
        int k = N - 2;
        while (k >= 0 && cuts[k] == L - (N - 1 - k)) --k;
        if (k < 0) break;
        ++cuts[k];
        for (int m = k + 1; m < N - 1; ++m) cuts[m] = cuts[m - 1] + 1;
    }
}

// ---- branch and bound ------------------------------------------------------

struct search_context {
    const ilp_instance& inst;
    int L, N, nb;
    double k_pre, k_dec;  // bubble multipliers of the two phases

    // additive footprint of (layer, device, bit): pre + dec + theta * omega
    // (kInf when the bit is unsupported on the device)
    std::vector<std::vector<std::vector<double>>> contrib;
    // bit indices per (layer, device) sorted by ascending contribution
    std::vector<std::vector<std::vector<int>>> bit_order;
    // suffix sums (layers i..L-1) of per-layer minima over devices >= jlo:
    // total contribution and phase-only lower bounds
    std::vector<std::vector<double>> suffix_total;  // [jlo][i], size L+1
    std::vector<std::vector<double>> suffix_pre;
    std::vector<std::vector<double>> suffix_dec;
    std::vector<std::int64_t> suffix_min_mem;  // [i], min-bytes for layers i..
    std::vector<std::int64_t> budget_suffix;   // [j], budgets of stages j..
    double floor_pre = 0.0, floor_dec = 0.0;   // link floors on Tmax

    explicit search_context(const ilp_instance& in) : inst(in) {
        L = in.num_layers();
        N = in.num_devices();
        nb = in.num_bits();
        k_pre = static_cast<double>(bubble_count(in.global_bz, in.eta));
        k_dec = static_cast<double>(bubble_count(in.global_bz, in.xi)) *
                (in.gen_len - 1);

        contrib.assign(L, std::vector<std::vector<double>>(
                              N, std::vector<double>(nb, kInf)));
        bit_order.assign(L, std::vector<std::vector<int>>(N));
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < N; ++j) {
                auto& order = bit_order[i][j];
                for (int b = 0; b < nb; ++b) {
                    if (!inst.devices[j].bit_ok[b]) continue;
                    contrib[i][j][b] = inst.lat_pre[i][j][b] +
                                       inst.lat_dec[i][j][b] +
                                       inst.theta * inst.omega[i][b];
                    order.push_back(b);
                }
                std::sort(order.begin(), order.end(), [&](int a, int b2) {
                    if (contrib[i][j][a] != contrib[i][j][b2])
                        return contrib[i][j][a] < contrib[i][j][b2];
                    return a < b2;
                });
            }

        for (int j = 0; j < N; ++j) {
            floor_pre = std::max(floor_pre, inst.devices[j].comm_pre_s);
            floor_dec = std::max(floor_dec, inst.devices[j].comm_dec_s);
        }

        suffix_total.assign(N, std::vector<double>(L + 1, 0.0));
        suffix_pre.assign(N, std::vector<double>(L + 1, 0.0));
        suffix_dec.assign(N, std::vector<double>(L + 1, 0.0));
        for (int jlo = 0; jlo < N; ++jlo)
            for (int i = L - 1; i >= 0; --i) {
                // devices usable by layer i when the current stage is >= jlo:
                // at least jlo, at least N-(L-i) (later layers must fill the
                // remaining stages), at most min(N-1, i).
                const int lo = std::max(jlo, N - (L - i));
                const int hi = std::min(N - 1, i);
                double best_total = kInf, best_pre = kInf, best_dec = kInf;
                for (int j = lo; j <= hi; ++j)
                    for (int b = 0; b < nb; ++b) {
                        if (!inst.devices[j].bit_ok[b]) continue;
                        best_total = std::min(best_total, contrib[i][j][b]);
                        best_pre = std::min(best_pre, inst.lat_pre[i][j][b]);
                        best_dec = std::min(best_dec, inst.lat_dec[i][j][b]);
                    }
                suffix_total[jlo][i] = suffix_total[jlo][i + 1] + best_total;
                suffix_pre[jlo][i] = suffix_pre[jlo][i + 1] + best_pre;
                suffix_dec[jlo][i] = suffix_dec[jlo][i + 1] + best_dec;
            }

        suffix_min_mem.assign(L + 1, 0);
        for (int i = L - 1; i >= 0; --i) {
            std::int64_t mn = std::numeric_limits<std::int64_t>::max();
            for (int b = 0; b < nb; ++b) mn = std::min(mn, inst.mem[i][b]);
            suffix_min_mem[i] = suffix_min_mem[i + 1] + mn;
        }
        budget_suffix.assign(N + 1, 0);
        for (int j = N - 1; j >= 0; --j)
            budget_suffix[j] = budget_suffix[j + 1] + inst.devices[j].mem_budget;
    }
};

struct bb_runner {
    const ilp_instance& inst;
    const search_context& ctx;
    clock_type::time_point t0 = clock_type::now();
    double limit_s;
    bool timed_out = false;
    std::int64_t nodes = 0;

    plan_candidate best;  // infeasible sentinel until a leaf is reached
    std::vector<int> cur_bits;
    std::vector<int> cur_bounds;
    int balanced_target;  // preferred stage size for child ordering

    bb_runner(const ilp_instance& in, const search_context& c, double limit)
        : inst(in), ctx(c), limit_s(limit) {
        cur_bits.assign(ctx.L, -1);
        balanced_target = static_cast<int>(ceil_div(ctx.L, ctx.N));
    }

    void offer_seed(const plan_candidate& seed) {
        if (!seed.feasible) return;
        if (static_cast<int>(seed.boundaries.size()) != ctx.N ||
            static_cast<int>(seed.bit_idx.size()) != ctx.L)
            return;
        if (!best.feasible || candidate_better(inst, seed, best)) best = seed;
    }

    void record_leaf() {
        plan_candidate cand;
        cand.boundaries = cur_bounds;
        cand.boundaries.push_back(ctx.L);
        cand.bit_idx = cur_bits;
        cand.feasible = true;
        cand.objective = evaluate(inst, cand.boundaries, cand.bit_idx).total;
        if (!best.feasible || candidate_better(inst, cand, best))
            best = std::move(cand);
    }

    // state: layer i is about to be assigned to device j (stage partials for
    // device j are open_pre/open_dec; earlier stages are folded into the
    // closed aggregates)
    void dfs(int i, int j, std::int64_t mem_left, double open_pre,
             double open_dec, double closed_max_pre, double closed_max_dec,
             double closed_pre_tot, double closed_dec_tot, double qual) {
        if (timed_out) return;
        if ((++nodes & 0xFFF) == 0 && seconds_since(t0) > limit_s) {
            timed_out = true;
            return;
        }
        // optimistic completion bound (admissible)
        if (best.feasible) {
            const double rest_total = ctx.suffix_total[j][i];
            if (rest_total == kInf) return;
            const double pre_sum_lb =
                closed_pre_tot + open_pre + ctx.suffix_pre[j][i];
            const double dec_sum_lb =
                closed_dec_tot + open_dec + ctx.suffix_dec[j][i];
            const double lb_tmax_pre = std::max(
                {closed_max_pre, open_pre, pre_sum_lb / ctx.N});
            const double lb_tmax_dec = std::max(
                {closed_max_dec, open_dec, dec_sum_lb / ctx.N});
            const double lb = closed_pre_tot + closed_dec_tot + qual +
                              open_pre + open_dec + rest_total +
                              ctx.k_pre * lb_tmax_pre +
                              ctx.k_dec * lb_tmax_dec;
            if (lb > best.objective) return;
        }
        // memory look-ahead over the remaining stages
        if (ctx.suffix_min_mem[i] > mem_left + ctx.budget_suffix[j + 1]) return;

        const int R = ctx.L - (i + 1);  // layers left after i
        const bool can_finish = R == 0 && j == ctx.N - 1;
        const bool can_stay = R >= ctx.N - j;          // j keeps collecting
        const bool can_advance = j + 1 <= ctx.N - 1 && R >= ctx.N - 1 - j;
        if (!can_finish && !can_stay && !can_advance) return;

        // prefer growing the open stage until it reaches the balanced size
        const int open_count = i - (cur_bounds.empty() ? 0 : cur_bounds.back());
        const bool stay_first = open_count + 1 < balanced_target;

        for (int b : ctx.bit_order[i][j]) {
            const std::int64_t need = inst.mem[i][b];
            if (need > mem_left) continue;
            cur_bits[i] = b;
            const double npre = open_pre + inst.lat_pre[i][j][b];
            const double ndec = open_dec + inst.lat_dec[i][j][b];
            const double nqual = qual + inst.theta * inst.omega[i][b];
            if (can_finish) record_leaf();
            for (int pass = 0; pass < 2 && !timed_out; ++pass) {
                const bool do_stay = (pass == 0) == stay_first;
                if (do_stay) {
                    if (can_stay)
                        dfs(i + 1, j, mem_left - need, npre, ndec,
                            closed_max_pre, closed_max_dec, closed_pre_tot,
                            closed_dec_tot, nqual);
                } else if (can_advance) {
                    cur_bounds.push_back(i + 1);
                    dfs(i + 1, j + 1, inst.devices[j + 1].mem_budget, 0.0, 0.0,
                        std::max(closed_max_pre, npre),
                        std::max(closed_max_dec, ndec), closed_pre_tot + npre,
                        closed_dec_tot + ndec, nqual);
                    cur_bounds.pop_back();
                }
            }
            cur_bits[i] = -1;
            if (timed_out) return;
        }
    }
};

plan_candidate reevaluate(const ilp_instance& inst, plan_candidate cand) {
    cand.feasible = memory_ok(inst, cand.boundaries, cand.bit_idx);
    cand.objective = cand.feasible
                         ? evaluate(inst, cand.boundaries, cand.bit_idx).total
                         : kInf;
    return cand;
}

// structural + support validity of a candidate against an instance
bool candidate_valid(const ilp_instance& inst, const plan_candidate& c) {
    const int L = inst.num_layers(), N = inst.num_devices();
    if (static_cast<int>(c.boundaries.size()) != N ||
        static_cast<int>(c.bit_idx.size()) != L)
        return false;
    int prev = 0;
    for (int j = 0; j < N; ++j) {
        if (c.boundaries[j] <= prev) return false;
        prev = c.boundaries[j];
    }
    if (c.boundaries.back() != L) return false;
    int j = 0;
    for (int i = 0; i < L; ++i) {
        while (i >= c.boundaries[j]) ++j;
        const int b = c.bit_idx[i];
        if (b < 0 || b >= inst.num_bits()) return false;
        if (!inst.devices[j].bit_ok[b]) return false;
    }
    return true;
}

}  // namespace

plan_candidate brute_force_oracle(const ilp_instance& inst,
                                  oracle_stats* stats) {
    inst.validate();
    const int L = inst.num_layers(), N = inst.num_devices(),
              nb = inst.num_bits();
    if (L > 8 || N > 3 || nb > 3)
        throw std::invalid_argument(
            "oracle: guarded to L <= 8, N <= 3, |bits| <= 3");
    oracle_stats local;
    local.bit_vectors_per_partition = 1;
    for (int i = 0; i < L; ++i) local.bit_vectors_per_partition *= nb;

    plan_candidate best;
    std::vector<int> bit_idx(L, 0);
    for_each_partition(L, N, [&](const std::vector<int>& bounds) {
        ++local.partitions;
        std::fill(bit_idx.begin(), bit_idx.end(), 0);
        while (true) {
            ++local.candidates;
            // support check per stage
            bool ok = true;
            int j = 0;
            for (int i = 0; i < L && ok; ++i) {
                while (i >= bounds[j]) ++j;
                if (!inst.devices[j].bit_ok[bit_idx[i]]) ok = false;
            }
            if (ok && memory_ok(inst, bounds, bit_idx)) {
                plan_candidate cand;
                cand.boundaries = bounds;
                cand.bit_idx = bit_idx;
                cand.feasible = true;
                cand.objective = evaluate(inst, bounds, bit_idx).total;
                if (!best.feasible || candidate_better(inst, cand, best))
                    best = std::move(cand);
            }
            // odometer over bit vectors
            int k = L - 1;
            while (k >= 0 && bit_idx[k] == nb - 1) bit_idx[k--] = 0;
            if (k < 0) break;
            ++bit_idx[k];
        }
    });
    if (stats) *stats = local;
    return best;
}

solve_result solve_ilp(const ilp_instance& inst, const solve_options& opt) {
    inst.validate();
    const auto t0 = clock_type::now();
    solve_result res;
    if (inst.num_devices() > inst.num_layers()) {
        // impossible to give every stage a layer; proven infeasible
        res.optimal = true;
        res.elapsed_s = seconds_since(t0);
        return res;
    }
    search_context ctx(inst);
    bb_runner run(inst, ctx, opt.time_limit_s);
    if (opt.incumbent && candidate_valid(inst, *opt.incumbent))
        run.offer_seed(reevaluate(inst, *opt.incumbent));
    run.dfs(0, 0, inst.devices[0].mem_budget - inst.embed_bytes, 0.0, 0.0,
            ctx.floor_pre, ctx.floor_dec, 0.0, 0.0, 0.0);
    res.best = run.best;
    res.best.optimal = !run.timed_out;
    res.optimal = !run.timed_out;
    res.nodes = run.nodes;
    res.elapsed_s = seconds_since(t0);
    return res;
}

solve_result adabits(const ilp_instance& inst, const solve_options& opt) {
    inst.validate();
    // quality-only twin: zero latency everywhere, unit theta
    ilp_instance twin = inst;
    twin.theta = 1.0;
    for (auto& d : twin.devices) d.comm_pre_s = d.comm_dec_s = 0.0;
    for (auto& li : twin.lat_pre)
        for (auto& lj : li) std::fill(lj.begin(), lj.end(), 0.0);
    for (auto& li : twin.lat_dec)
        for (auto& lj : li) std::fill(lj.begin(), lj.end(), 0.0);
    solve_result res = solve_ilp(twin, opt);
    if (res.best.feasible) res.best = reevaluate(inst, res.best);
    return res;
}

std::vector<transfer_rule> default_transfer_rules() {
    return {{3, 4, 1}, {4, 8, 2}, {3, 8, 2}, {4, 16, 4}, {8, 16, 2}};
}

namespace {

// Greedy intra-stage placement of a bit multiset: the layer that degrades
// most at the multiset's lowest precision receives the highest precision.
void place_bits(const ilp_instance& inst, int begin, int end,
                std::vector<int> multiset, std::vector<int>& bit_idx) {
    std::sort(multiset.begin(), multiset.end(), std::greater<int>());
    const int lo = multiset.back(), hi = multiset.front();
    std::vector<int> layers;
    for (int i = begin; i < end; ++i) layers.push_back(i);
    std::stable_sort(layers.begin(), layers.end(), [&](int a, int b) {
        const double sa = inst.omega[a][lo] - inst.omega[a][hi];
        const double sb = inst.omega[b][lo] - inst.omega[b][hi];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    for (size_t k = 0; k < layers.size(); ++k)
        bit_idx[layers[k]] = multiset[k];
}

}  // namespace

plan_candidate bitwidth_transfer(const ilp_instance& inst,
                                 const plan_candidate& start,
                                 const std::vector<transfer_rule>& rules,
                                 int max_rounds) {
    if (!start.feasible || !candidate_valid(inst, start)) return start;
    const int L = inst.num_layers(), N = inst.num_devices();
    plan_candidate cur = reevaluate(inst, start);
    if (!cur.feasible) return start;

    auto bit_index_of = [&](int bit) {
        auto it = std::find(inst.bits.begin(), inst.bits.end(), bit);
        return it == inst.bits.end()
                   ? -1
                   : static_cast<int>(it - inst.bits.begin());
    };

    for (int round = 0; round < max_rounds; ++round) {
        // straggler = stage with the largest objective footprint
        const auto metrics = per_stage_metrics(inst, cur.boundaries, cur.bit_idx);
        int st = 0;
        for (int j = 1; j < N; ++j)
            if (metrics[j].load > metrics[st].load) st = j;

        plan_candidate best_move;
        for (int pi = 0; pi < N; ++pi) {
            if (pi == st) continue;
            for (const auto& rule : rules) {
                const int ist = bit_index_of(rule.bit_st);
                const int ipi = bit_index_of(rule.bit_pi);
                if (ist < 0 || ipi < 0) continue;
                const int delta = rule.nums - 1;

                const int st_begin = st == 0 ? 0 : cur.boundaries[st - 1];
                const int st_end = cur.boundaries[st];
                const int pi_begin = pi == 0 ? 0 : cur.boundaries[pi - 1];
                const int pi_end = cur.boundaries[pi];
                int st_count = 0, pi_count = 0;
                for (int i = st_begin; i < st_end; ++i)
                    if (cur.bit_idx[i] == ist) ++st_count;
                for (int i = pi_begin; i < pi_end; ++i)
                    if (cur.bit_idx[i] == ipi) ++pi_count;
                if (st_count < rule.nums || pi_count < 1) continue;
                if (st_end - st_begin - delta < 1) continue;  // st keeps >= 1

                // shift the intervening boundaries by delta toward pi
                std::vector<int> bounds = cur.boundaries;
                if (delta > 0) {
                    if (pi < st)
                        for (int k = pi; k < st; ++k) bounds[k] += delta;
                    else
                        for (int k = st; k < pi; ++k) bounds[k] -= delta;
                }
                bool shape_ok = true;
                int prev = 0;
                for (int j = 0; j < N; ++j) {
                    if (bounds[j] <= prev) shape_ok = false;
                    prev = bounds[j];
                }
                if (!shape_ok) continue;

                // stage bit lists follow their (shifted) slots; st and pi get
                // edited multisets placed greedily
                std::vector<int> bit_idx(L, -1);
                for (int j = 0; j < N; ++j) {
                    const int ob = j == 0 ? 0 : cur.boundaries[j - 1];
                    const int oe = cur.boundaries[j];
                    const int nb2 = j == 0 ? 0 : bounds[j - 1];
                    std::vector<int> multiset(cur.bit_idx.begin() + ob,
                                              cur.bit_idx.begin() + oe);
                    if (j == st) {
                        int removed = 0;
                        for (auto it = multiset.begin();
                             it != multiset.end() && removed < rule.nums;)
                            if (*it == ist) {
                                it = multiset.erase(it);
                                ++removed;
                            } else {
                                ++it;
                            }
                        multiset.push_back(ipi);
                    } else if (j == pi) {
                        auto it = std::find(multiset.begin(), multiset.end(),
                                            ipi);
                        multiset.erase(it);
                        for (int k = 0; k < rule.nums; ++k)
                            multiset.push_back(ist);
                    }
                    place_bits(inst, nb2, bounds[j], std::move(multiset),
                               bit_idx);
                }

                // support check, then full evaluation
                bool ok = true;
                int j2 = 0;
                for (int i = 0; i < L && ok; ++i) {
                    while (i >= bounds[j2]) ++j2;
                    if (!inst.devices[j2].bit_ok[bit_idx[i]]) ok = false;
                }
                if (!ok || !memory_ok(inst, bounds, bit_idx)) continue;
                plan_candidate cand;
                cand.boundaries = std::move(bounds);
                cand.bit_idx = std::move(bit_idx);
                cand.feasible = true;
                cand.objective =
                    evaluate(inst, cand.boundaries, cand.bit_idx).total;
                if (!best_move.feasible ||
                    candidate_better(inst, cand, best_move))
                    best_move = std::move(cand);
            }
        }
        if (!best_move.feasible || best_move.objective >= cur.objective) break;
        cur = std::move(best_move);
    }
    return cur;
}

std::string export_lp(const ilp_instance& inst) {
    inst.validate();
    const int L = inst.num_layers(), N = inst.num_devices(),
              nb = inst.num_bits();
    const double k_pre = static_cast<double>(bubble_count(inst.global_bz,
                                                          inst.eta));
    const double k_dec =
        static_cast<double>(bubble_count(inst.global_bz, inst.xi)) *
        (inst.gen_len - 1);
    auto zname = [&](int i, int j, int b) {
        return fmt::format("z_{}_{}_{}", i, j, inst.bits[b]);
    };
    std::string out;
    out += "\\ mixed-precision pipeline partition model\n";
    out += "Minimize\n obj:";
    out += fmt::format(" {:.17g} Tmax_pre + {:.17g} Tmax_dec", k_pre, k_dec);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < N; ++j)
            for (int b = 0; b < nb; ++b) {
                if (!inst.devices[j].bit_ok[b]) continue;
                const double c = inst.lat_pre[i][j][b] + inst.lat_dec[i][j][b] +
                                 inst.theta * inst.omega[i][b];
                out += fmt::format(" + {:.17g} {}", c, zname(i, j, b));
            }
    out += "\nSubject To\n";
    for (int i = 0; i < L; ++i) {
        out += fmt::format(" assign_{}:", i);
        bool first = true;
        for (int j = 0; j < N; ++j)
            for (int b = 0; b < nb; ++b) {
                if (!inst.devices[j].bit_ok[b]) continue;
                out += fmt::format("{} {}", first ? "" : " +", zname(i, j, b));
                first = false;
            }
        out += " = 1\n";
    }
    for (int j = 0; j < N; ++j) {
        out += fmt::format(" tmax_pre_{}:", j);
        for (int i = 0; i < L; ++i)
            for (int b = 0; b < nb; ++b) {
                if (!inst.devices[j].bit_ok[b]) continue;
                out += fmt::format(" + {:.17g} {}", inst.lat_pre[i][j][b],
                                   zname(i, j, b));
            }
        out += " - Tmax_pre <= 0\n";
        out += fmt::format(" tmax_dec_{}:", j);
        for (int i = 0; i < L; ++i)
            for (int b = 0; b < nb; ++b) {
                if (!inst.devices[j].bit_ok[b]) continue;
                out += fmt::format(" + {:.17g} {}", inst.lat_dec[i][j][b],
                                   zname(i, j, b));
            }
        out += " - Tmax_dec <= 0\n";
        if (inst.devices[j].comm_pre_s > 0.0)
            out += fmt::format(" link_pre_{}: Tmax_pre >= {:.17g}\n", j,
                               inst.devices[j].comm_pre_s);
        if (inst.devices[j].comm_dec_s > 0.0)
            out += fmt::format(" link_dec_{}: Tmax_dec >= {:.17g}\n", j,
                               inst.devices[j].comm_dec_s);
        out += fmt::format(" mem_{}:", j);
        for (int i = 0; i < L; ++i)
            for (int b = 0; b < nb; ++b) {
                if (!inst.devices[j].bit_ok[b]) continue;
                out += fmt::format(" + {} {}", inst.mem[i][b], zname(i, j, b));
            }
        const std::int64_t rhs =
            inst.devices[j].mem_budget - (j == 0 ? inst.embed_bytes : 0);
        out += fmt::format(" <= {}\n", rhs);
        out += fmt::format(" nonempty_{}:", j);
        bool first = true;
        for (int i = 0; i < L; ++i)
            for (int b = 0; b < nb; ++b) {
                if (!inst.devices[j].bit_ok[b]) continue;
                out += fmt::format("{} {}", first ? "" : " +", zname(i, j, b));
                first = false;
            }
        out += " >= 1\n";
    }
    // contiguity: layer i+1 may not sit on an earlier device than layer i
    for (int i = 0; i + 1 < L; ++i)
        for (int j = 1; j < N; ++j) {
            out += fmt::format(" contig_{}_{}:", i, j);
            bool some = false;
            for (int b = 0; b < nb; ++b)
                if (inst.devices[j].bit_ok[b]) {
                    out += fmt::format("{} {}", some ? " +" : "",
                                       zname(i, j, b));
                    some = true;
                }
            for (int jp = 0; jp < j; ++jp)
                for (int b = 0; b < nb; ++b)
                    if (inst.devices[jp].bit_ok[b]) {
                        out += fmt::format(" + {}", zname(i + 1, jp, b));
                        some = true;
                    }
            out += " <= 1\n";
        }
    // endpoints: first layer on the first stage, last layer on the last
    {
        out += " first_layer:";
        bool first = true;
        for (int b = 0; b < nb; ++b)
            if (inst.devices[0].bit_ok[b]) {
                out += fmt::format("{} {}", first ? "" : " +", zname(0, 0, b));
                first = false;
            }
        out += " = 1\n";
        out += " last_layer:";
        first = true;
        for (int b = 0; b < nb; ++b)
            if (inst.devices[N - 1].bit_ok[b]) {
                out += fmt::format("{} {}", first ? "" : " +",
                                   zname(L - 1, N - 1, b));
                first = false;
            }
        out += " = 1\n";
    }
    out += "Bounds\n Tmax_pre >= 0\n Tmax_dec >= 0\nBinaries\n";
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < N; ++j)
            for (int b = 0; b < nb; ++b)
                if (inst.devices[j].bit_ok[b])
                    out += fmt::format(" {}\n", zname(i, j, b));
    out += "End\n";
    return out;
}

}  // namespace hetplan::optimizer
