#include "hetplan/optimizer/instance.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hetplan/memcost/memcost.hpp"

namespace hetplan::optimizer {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

void ilp_instance::validate() const {
    validate_bits(bits);
    if (devices.empty()) fail("instance: no devices");
    const int L = num_layers(), N = num_devices(), nb = num_bits();
    if (L <= 0) fail("instance: no layers");
    if (static_cast<int>(lat_pre.size()) != L ||
        static_cast<int>(lat_dec.size()) != L ||
        static_cast<int>(omega.size()) != L)
        fail("instance: table layer dimensions disagree");
    for (int i = 0; i < L; ++i) {
        if (static_cast<int>(lat_pre[i].size()) != N ||
            static_cast<int>(lat_dec[i].size()) != N)
            fail("instance: latency tables must cover every device");
        for (int j = 0; j < N; ++j)
            if (static_cast<int>(lat_pre[i][j].size()) != nb ||
                static_cast<int>(lat_dec[i][j].size()) != nb)
                fail("instance: latency tables must cover every bitwidth");
        if (static_cast<int>(mem[i].size()) != nb ||
            static_cast<int>(omega[i].size()) != nb)
            fail("instance: memory/quality tables must cover every bitwidth");
    }
    for (const auto& d : devices)
        if (static_cast<int>(d.bit_ok.size()) != nb)
            fail("instance: device bit support mask has wrong size");
    if (eta < 1 || xi < eta || global_bz < xi)
        fail("instance: micro-batch sizes must satisfy 1 <= eta <= xi <= B");
    if (gen_len < 1) fail("instance: gen_len must be positive");
    if (theta < 0.0) fail("instance: theta must be nonnegative");
}

int plan_candidate::total_bits(const ilp_instance& inst) const {
    int acc = 0;
    for (int bi : bit_idx) acc += inst.bits[bi];
    return acc;
}

bool memory_ok(const ilp_instance& inst, const std::vector<int>& boundaries,
               const std::vector<int>& bit_idx,
               std::vector<std::int64_t>* out) {
    const int N = inst.num_devices();
    if (out) out->assign(N, 0);
    bool ok = true;
    int begin = 0;
    for (int j = 0; j < N; ++j) {
        std::int64_t used = j == 0 ? inst.embed_bytes : 0;
        for (int i = begin; i < boundaries[j]; ++i)
            used += inst.mem[i][bit_idx[i]];
        if (out) (*out)[j] = used;
        if (used > inst.devices[j].mem_budget) ok = false;
        begin = boundaries[j];
    }
    return ok;
}

objective_breakdown evaluate(const ilp_instance& inst,
                             const std::vector<int>& boundaries,
                             const std::vector<int>& bit_idx) {
    objective_breakdown bd;
    bd.theta = inst.theta;
    const int N = inst.num_devices();
    int begin = 0;
    for (int j = 0; j < N; ++j) {
        double pre = 0.0, dec = 0.0;
        for (int i = begin; i < boundaries[j]; ++i) {
            pre += inst.lat_pre[i][j][bit_idx[i]];
            dec += inst.lat_dec[i][j][bit_idx[i]];
            bd.omega_sum += inst.omega[i][bit_idx[i]];
        }
        bd.t_pre_total += pre;
        bd.t_dec_total += dec;
        bd.t_max_pre = std::max({bd.t_max_pre, pre, inst.devices[j].comm_pre_s});
        bd.t_max_dec = std::max({bd.t_max_dec, dec, inst.devices[j].comm_dec_s});
        begin = boundaries[j];
    }
    bd.total = recompose_objective(bd, inst.global_bz, inst.eta, inst.xi,
                                   inst.gen_len);
    return bd;
}

std::vector<stage_metrics> per_stage_metrics(const ilp_instance& inst,
                                             const std::vector<int>& boundaries,
                                             const std::vector<int>& bit_idx) {
    const int N = inst.num_devices();
    std::vector<std::int64_t> used;
    memory_ok(inst, boundaries, bit_idx, &used);
    const double k_pre =
        static_cast<double>(bubble_count(inst.global_bz, inst.eta));
    const double k_dec =
        static_cast<double>(bubble_count(inst.global_bz, inst.xi)) *
        (inst.gen_len - 1);
    std::vector<stage_metrics> out(N);
    int begin = 0;
    for (int j = 0; j < N; ++j) {
        auto& m = out[j];
        for (int i = begin; i < boundaries[j]; ++i) {
            m.t_pre += inst.lat_pre[i][j][bit_idx[i]];
            m.t_dec += inst.lat_dec[i][j][bit_idx[i]];
        }
        m.comm_pre = inst.devices[j].comm_pre_s;
        m.comm_dec = inst.devices[j].comm_dec_s;
        m.mem_used = used[j];
        m.mem_budget = inst.devices[j].mem_budget;
        m.load = k_pre * std::max(m.t_pre, m.comm_pre) +
                 k_dec * std::max(m.t_dec, m.comm_dec) + m.t_pre + m.t_dec;
        begin = boundaries[j];
    }
    return out;
}

bool candidate_better(const ilp_instance& inst, const plan_candidate& a,
                      const plan_candidate& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (!a.feasible) return false;
    if (a.objective != b.objective) return a.objective < b.objective;
    const int ta = a.total_bits(inst), tb = b.total_bits(inst);
    if (ta != tb) return ta > tb;
    if (a.boundaries != b.boundaries) return a.boundaries < b.boundaries;
    return a.bit_idx < b.bit_idx;
}

ilp_instance build_instance(const instance_inputs& in) {
    validate_model(in.model);
    validate_cluster(in.cluster);
    validate_workload(in.load);
    validate_bits(in.bits);
    const int L = in.model.num_layers;
    const int N = static_cast<int>(in.device_order.size());
    if (N == 0 || N > static_cast<int>(in.cluster.devices.size()))
        fail("instance: device order size out of range");
    if (in.omega.num_layers() < L)
        fail(fmt::format("instance: quality table has {} layers, model has {}",
                         in.omega.num_layers(), L));
    if (in.omega.bits != in.bits)
        fail("instance: quality table bit set does not match the run bit set");

    ilp_instance inst;
    inst.bits = in.bits;
    inst.theta = in.theta;
    inst.global_bz = in.load.global_bz;
    inst.eta = in.eta;
    inst.xi = in.xi;
    inst.gen_len = in.load.gen_len;
    inst.embed_bytes = memcost::embed_mem_bytes(in.model);

    const int nb = static_cast<int>(in.bits.size());
    const double s = in.load.prompt_len;
    const double half_t = in.load.gen_len / 2.0;

    // per-boundary activation payloads (bytes)
    const double p_pre = 2.0 * in.eta * in.load.prompt_len *
                         static_cast<double>(in.model.h1);
    const double p_dec = 2.0 * in.xi * static_cast<double>(in.model.h1);

    // the transient activation peak is device-independent; charge it once
    const std::int64_t tmp_bytes =
        memcost::shard_mem_bytes(in.model, {}, in.load, false, in.eta, in.xi,
                                 in.bit_kv, in.alpha)
            .tmp_bytes;

    inst.devices.resize(N);
    for (int j = 0; j < N; ++j) {
        const auto& dev = in.cluster.devices.at(in.device_order[j]);
        auto& sd = inst.devices[j];
        sd.name = dev.name;
        sd.mem_budget = dev.mem_bytes - tmp_bytes;
        sd.bit_ok.assign(nb, 0);
        for (int bi = 0; bi < nb; ++bi)
            sd.bit_ok[bi] = std::binary_search(dev.supported_bits.begin(),
                                               dev.supported_bits.end(),
                                               in.bits[bi])
                                ? 1
                                : 0;
        if (j + 1 < N) {
            double bw = dev.link_bw_bytes_per_s;
            if (!in.cluster.pairwise_bw.empty())
                bw = in.cluster.pairwise_bw[in.device_order[j]]
                                           [in.device_order[j + 1]];
            sd.comm_pre_s = p_pre / bw;
            sd.comm_dec_s = p_dec / bw;
        }
    }

    inst.lat_pre.assign(L, std::vector<std::vector<double>>(
                               N, std::vector<double>(nb, 0.0)));
    inst.lat_dec = inst.lat_pre;
    inst.mem.assign(L, std::vector<std::int64_t>(nb, 0));
    inst.omega.assign(L, std::vector<double>(nb, 0.0));
    const std::int64_t kv = memcost::kv_cache_bytes(
        in.model, in.load.global_bz, in.load.prompt_len, in.load.gen_len,
        in.bit_kv);
    for (int i = 0; i < L; ++i) {
        for (int bi = 0; bi < nb; ++bi) {
            inst.mem[i][bi] =
                memcost::decoder_weight_bytes(in.model, in.bits[bi]) + kv;
            inst.omega[i][bi] = in.omega.omega[i][bi];
        }
        for (int j = 0; j < N; ++j) {
            const auto& name = inst.devices[j].name;
            for (int bi = 0; bi < nb; ++bi) {
                if (!inst.devices[j].bit_ok[bi]) continue;
                inst.lat_pre[i][j][bi] = latcost::predict_prefill(
                    in.lat, name, in.bits[bi], in.eta, s);
                inst.lat_dec[i][j][bi] = latcost::predict_decode(
                    in.lat, name, in.bits[bi], in.xi, s, half_t);
            }
        }
    }
    inst.validate();
    return inst;
}

}  // namespace hetplan::optimizer
