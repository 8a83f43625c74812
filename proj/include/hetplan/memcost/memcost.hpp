#pragma once

// Byte-exact memory accounting for a quantized decoder stack: embedding
// tables, per-layer weights at a given bitwidth, KV cache, and the transient
// activation peak. Everything returns whole bytes (fractional packings round
// up); embeddings and norm parameters always stay at 16-bit.

#include <cstdint>

#include "hetplan/types.hpp"

namespace hetplan::memcost {

enum class phase { prefill, decode };

struct mem_breakdown {
    std::int64_t weight_bytes = 0;  // quantized decoder weights
    std::int64_t kv_bytes = 0;      // KV cache for the full batch
    std::int64_t tmp_bytes = 0;     // transient activation peak (charged once)
    std::int64_t embed_bytes = 0;   // embedding tables (first device only)
    std::int64_t total() const {
        return weight_bytes + kv_bytes + tmp_bytes + embed_bytes;
    }
};

// Token + positional tables, the output projection tying, and (when the
// embedding width differs from the hidden width) the in/out projections.
std::int64_t embed_mem_bytes(const model_spec& m);

// One decoder layer's weights at `bit` (attention QKVO + two MLP mats
// quantized; norm parameters kept at 16-bit).
std::int64_t decoder_weight_bytes(const model_spec& m, int bit);

// KV cache for one layer: v requests, s prompt + n generated tokens.
std::int64_t kv_cache_bytes(const model_spec& m, std::int64_t v,
                            std::int64_t s, std::int64_t n, int bit_kv = 16);

// Peak transient activation for a micro-batch of v requests. `t` is the
// number of already-generated tokens (decode attends over s + t keys);
// ignored for prefill. `alpha` is a safety multiplier on the dominant buffer.
std::int64_t peak_tmp_bytes(const model_spec& m, std::int64_t v, phase ph,
                            std::int64_t s, std::int64_t t, double alpha = 2.0);

// Full footprint of a device hosting `num_layers` consecutive layers with the
// given per-layer bits (entries [layer_begin, layer_begin+num_layers) of
// layer_bits). eta/xi are the micro-batch sizes used to size the transient
// peak; pass 0 to fall back to the global batch size.
mem_breakdown shard_mem_bytes(const model_spec& m,
                              const std::vector<int>& layer_bits,
                              const workload& w, bool is_first_device,
                              int eta = 0, int xi = 0, int bit_kv = 16,
                              double alpha = 2.0);

}  // namespace hetplan::memcost
