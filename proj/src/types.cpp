#include "hetplan/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace hetplan {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

double recompose_objective(const objective_breakdown& parts, int global_bz,
                           int eta, int xi, int gen_len) {
    const double pre_bubbles = static_cast<double>(bubble_count(global_bz, eta));
    const double dec_bubbles = static_cast<double>(bubble_count(global_bz, xi));
    return pre_bubbles * parts.t_max_pre +
           dec_bubbles * (gen_len - 1) * parts.t_max_dec + parts.t_pre_total +
           parts.t_dec_total + parts.theta * parts.omega_sum;
}

void validate_model(const model_spec& m) {
    if (m.num_layers <= 0) fail("model: num_layers must be positive");
    if (m.h1 <= 0 || m.h2 <= 0) fail("model: hidden sizes must be positive");
    if (m.num_heads <= 0) fail("model: num_heads must be positive");
    if (m.h1 % m.num_heads != 0)
        fail("model: hidden size must divide evenly into heads");
    if (m.vocab_s <= 0 || m.pos_s <= 0)
        fail("model: vocab/positional sizes must be positive");
    if (m.d_t <= 0 || m.d_p <= 0)
        fail("model: embedding dims must be positive");
}

void validate_cluster(const cluster_spec& c) {
    if (c.devices.empty()) fail("cluster: needs at least one device");
    for (const auto& d : c.devices) {
        if (d.name.empty()) fail("cluster: device with empty name");
        if (d.mem_bytes <= 0)
            fail(fmt::format("cluster: device '{}' has nonpositive memory", d.name));
        if (d.link_bw_bytes_per_s <= 0.0)
            fail(fmt::format("cluster: device '{}' has nonpositive link bandwidth",
                             d.name));
        if (!std::is_sorted(d.supported_bits.begin(), d.supported_bits.end()))
            fail(fmt::format("cluster: device '{}' bits must be sorted", d.name));
    }
    if (!c.pairwise_bw.empty()) {
        const size_t n = c.devices.size();
        if (c.pairwise_bw.size() != n)
            fail("cluster: pairwise bandwidth matrix has wrong row count");
        for (size_t i = 0; i < n; ++i) {
            if (c.pairwise_bw[i].size() != n)
                fail("cluster: pairwise bandwidth matrix is not square");
            for (size_t j = 0; j < n; ++j) {
                if (i != j && c.pairwise_bw[i][j] <= 0.0)
                    fail("cluster: pairwise bandwidth must be positive");
                if (c.pairwise_bw[i][j] != c.pairwise_bw[j][i])
                    fail("cluster: pairwise bandwidth must be symmetric");
            }
        }
    }
}

void validate_workload(const workload& w) {
    if (w.global_bz <= 0) fail("workload: B must be positive");
    if (w.prompt_len <= 0) fail("workload: s must be positive");
    if (w.gen_len <= 0) fail("workload: n must be positive");
}

void validate_bits(const bitwidth_set& bits) {
    if (bits.empty()) fail("bits: empty bitwidth set");
    if (!std::is_sorted(bits.begin(), bits.end()))
        fail("bits: bitwidth set must be sorted ascending");
    std::set<int> uniq(bits.begin(), bits.end());
    if (uniq.size() != bits.size()) fail("bits: duplicate bitwidth");
    for (int b : bits)
        if (b < 2 || b > 16) fail(fmt::format("bits: unsupported bitwidth {}", b));
    if (uniq.count(16) == 0)
        fail("bits: the 16-bit reference precision must be present");
}

void validate_plan(const plan& p, int num_layers, const workload& w,
                   const bitwidth_set& bits, int num_devices) {
    const int n_stages = static_cast<int>(p.stages.size());
    if (n_stages == 0) fail("plan: no stages");
    if (static_cast<int>(p.device_order.size()) != num_devices)
        fail("plan: device_order size mismatch");
    std::vector<bool> seen(num_devices, false);
    for (int d : p.device_order) {
        if (d < 0 || d >= num_devices) fail("plan: device index out of range");
        if (seen[d]) fail("plan: device_order is not a permutation");
        seen[d] = true;
    }
    if (n_stages != num_devices)
        fail("plan: every device must serve exactly one stage");
    int cursor = 0;
    for (int j = 0; j < n_stages; ++j) {
        const auto& st = p.stages[j];
        if (st.device != j) fail("plan: stages must follow device order");
        if (st.begin != cursor)
            fail(fmt::format("plan: stage {} is not contiguous with its "
                             "predecessor", j));
        if (st.end <= st.begin)
            fail(fmt::format("plan: stage {} is empty", j));
        cursor = st.end;
    }
    if (cursor != num_layers) fail("plan: stages do not cover all layers");
    if (static_cast<int>(p.layer_bits.size()) != num_layers)
        fail("plan: layer_bits size mismatch");
    for (int b : p.layer_bits)
        if (!std::binary_search(bits.begin(), bits.end(), b))
            fail(fmt::format("plan: layer bitwidth {} not in the bit set", b));
    if (p.eta < 1 || p.eta > p.xi || p.xi > w.global_bz)
        fail("plan: micro-batch sizes must satisfy 1 <= eta <= xi <= B");
    const double expect = recompose_objective(p.objective, w.global_bz, p.eta,
                                              p.xi, w.gen_len);
    const double tol = 1e-12 * std::max(1.0, std::abs(expect));
    if (std::abs(expect - p.objective.total) > tol)
        fail("plan: objective total does not recompose from its parts");
}

}  // namespace hetplan
