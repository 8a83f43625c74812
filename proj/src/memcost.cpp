#include "hetplan/memcost/memcost.hpp"

#include <algorithm>
#include <stdexcept>

namespace hetplan::memcost {

namespace {

using std::int64_t;

// fp16 storage: two bytes per parameter
constexpr int64_t kRefBytes = 2;

int64_t quantized_bytes(int64_t param_count, int bit) {
    // pack at `bit` bits per parameter, rounding up to whole bytes
    return ceil_div(param_count * bit, 8);
}

}  // namespace

int64_t embed_mem_bytes(const model_spec& m) {
    // token table + positional table + optional in/out projections + tied
    // output head, all at reference precision
    int64_t params = m.vocab_s * m.d_t + m.pos_s * m.d_t + m.vocab_s * m.d_t;
    if (m.d_t != m.h1) params += 2 * m.h1 * m.d_t;
    return params * kRefBytes;
}

int64_t decoder_weight_bytes(const model_spec& m, int bit) {
    if (bit < 2 || bit > 16)
        throw std::invalid_argument("memcost: bitwidth out of range");
    const int64_t quantized = 4 * m.h1 * m.h1 + 2 * m.h1 * m.h2;
    const int64_t norm_params = (m.norm == norm_kind::standard ? 6 : 4) * m.h1;
    return quantized_bytes(quantized, bit) + norm_params * kRefBytes;
}

int64_t kv_cache_bytes(const model_spec& m, int64_t v, int64_t s, int64_t n,
                       int bit_kv) {
    const int64_t elems = 2 * v * (s + n) * m.h1;  // keys + values
    return quantized_bytes(elems, bit_kv);
}

int64_t peak_tmp_bytes(const model_spec& m, int64_t v, phase ph, int64_t s,
                       int64_t t, double alpha) {
    const int64_t l = ph == phase::prefill ? s : 1;   // tokens in flight
    const int64_t ctx = ph == phase::prefill ? s : s + t;  // attended keys
    const int64_t qkv = 3 * v * l * m.h1;
    const int64_t ffn = v * l * m.h2;
    const int64_t scores = v * m.num_heads * l * ctx;
    const int64_t dominant = std::max({qkv, ffn, scores});
    return static_cast<int64_t>(alpha * static_cast<double>(dominant * kRefBytes));
}

mem_breakdown shard_mem_bytes(const model_spec& m,
                              const std::vector<int>& layer_bits,
                              const workload& w, bool is_first_device, int eta,
                              int xi, int bit_kv, double alpha) {
    mem_breakdown out;
    for (int bit : layer_bits) {
        out.weight_bytes += decoder_weight_bytes(m, bit);
        out.kv_bytes += kv_cache_bytes(m, w.global_bz, w.prompt_len, w.gen_len,
                                       bit_kv);
    }
    const int64_t v_pre = eta > 0 ? eta : w.global_bz;
    const int64_t v_dec = xi > 0 ? xi : w.global_bz;
    out.tmp_bytes = std::max(
        peak_tmp_bytes(m, v_pre, phase::prefill, w.prompt_len, 0, alpha),
        peak_tmp_bytes(m, v_dec, phase::decode, w.prompt_len, w.gen_len, alpha));
    if (is_first_device) out.embed_bytes = embed_mem_bytes(m);
    return out;
}

}  // namespace hetplan::memcost
