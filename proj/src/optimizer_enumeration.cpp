#include "hetplan/optimizer/enumeration.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <fmt/format.h>

namespace hetplan::optimizer {

std::vector<std::vector<int>> enumerate_orderings(const cluster_spec& cluster,
                                                  int cap) {
    validate_cluster(cluster);
    if (cap <= 0) throw std::invalid_argument("orderings: cap must be positive");
    const int n = static_cast<int>(cluster.devices.size());

    // interchangeability key; type ids in first-occurrence order
    using type_key = std::tuple<std::string, std::int64_t, double,
                                std::vector<int>>;
    std::map<type_key, int> type_of;
    std::vector<int> type_seq;
    std::vector<std::vector<int>> members;  // device indices per type
    for (int i = 0; i < n; ++i) {
        const auto& d = cluster.devices[i];
        type_key key{d.name, d.mem_bytes, d.link_bw_bytes_per_s,
                     d.supported_bits};
        auto [it, inserted] =
            type_of.emplace(key, static_cast<int>(members.size()));
        if (inserted) members.emplace_back();
        members[it->second].push_back(i);
        type_seq.push_back(it->second);
    }

    std::sort(type_seq.begin(), type_seq.end());
    std::vector<std::vector<int>> out;
    do {
        std::vector<int> order;
        std::vector<size_t> next(members.size(), 0);
        for (int t : type_seq) order.push_back(members[t][next[t]++]);
        out.push_back(std::move(order));
        if (static_cast<int>(out.size()) >= cap) break;
    } while (std::next_permutation(type_seq.begin(), type_seq.end()));
    return out;
}

std::vector<std::pair<int, int>> enumerate_microbatch_pairs(int global_bz,
                                                            int num_devices) {
    if (global_bz <= 0 || num_devices <= 0)
        throw std::invalid_argument(
            "micro-batch enumeration: B and N must be positive");
    const int even = static_cast<int>(ceil_div(global_bz, num_devices));
    std::vector<int> xis{even};
    for (int d = even; d <= global_bz; ++d)
        if (global_bz % d == 0) xis.push_back(d);
    std::sort(xis.begin(), xis.end());
    xis.erase(std::unique(xis.begin(), xis.end()), xis.end());

    std::vector<std::pair<int, int>> pairs;
    for (int xi : xis)
        for (int eta = 1; eta <= xi; ++eta) pairs.emplace_back(eta, xi);
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second < b.second;
                  return a.first < b.first;
              });
    return pairs;
}

grouped_instance group_layers(const ilp_instance& inst, int g) {
    inst.validate();
    if (g <= 0) throw std::invalid_argument("grouping: g must be positive");
    grouped_instance out;
    const int L = inst.num_layers(), N = inst.num_devices(),
              nb = inst.num_bits();
    for (int begin = 0; begin < L; begin += g)
        out.group_size.push_back(std::min(g, L - begin));
    const int G = static_cast<int>(out.group_size.size());

    out.inst = inst;
    out.inst.lat_pre.assign(G, std::vector<std::vector<double>>(
                                   N, std::vector<double>(nb, 0.0)));
    out.inst.lat_dec = out.inst.lat_pre;
    out.inst.mem.assign(G, std::vector<std::int64_t>(nb, 0));
    out.inst.omega.assign(G, std::vector<double>(nb, 0.0));
    int layer = 0;
    for (int gi = 0; gi < G; ++gi) {
        for (int k = 0; k < out.group_size[gi]; ++k, ++layer) {
            for (int b = 0; b < nb; ++b) {
                out.inst.mem[gi][b] += inst.mem[layer][b];
                out.inst.omega[gi][b] += inst.omega[layer][b];
            }
            for (int j = 0; j < N; ++j)
                for (int b = 0; b < nb; ++b) {
                    out.inst.lat_pre[gi][j][b] += inst.lat_pre[layer][j][b];
                    out.inst.lat_dec[gi][j][b] += inst.lat_dec[layer][j][b];
                }
        }
    }
    return out;
}

plan_candidate expand_candidate(const plan_candidate& grouped,
                                const std::vector<int>& group_size) {
    // prefix layer offsets per group
    std::vector<int> offset(group_size.size() + 1, 0);
    for (size_t gi = 0; gi < group_size.size(); ++gi)
        offset[gi + 1] = offset[gi] + group_size[gi];

    plan_candidate out;
    out.feasible = grouped.feasible;
    out.optimal = grouped.optimal;
    out.objective = grouped.objective;
    for (int gb : grouped.boundaries) out.boundaries.push_back(offset[gb]);
    for (size_t gi = 0; gi < grouped.bit_idx.size(); ++gi)
        for (int k = 0; k < group_size[gi]; ++k)
            out.bit_idx.push_back(grouped.bit_idx[gi]);
    return out;
}

}  // namespace hetplan::optimizer
