#include "hetplan/config.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

namespace hetplan {

namespace {

using ordered_json = nlohmann::ordered_json;

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// Published decoder-stack shapes. OPT embeds tokens at the hidden size and
// stores 2048 learned positions plus a 2-row offset; BLOOM has no positional
// table (ALiBi) so a single negligible row keeps the accounting positive.
const std::map<std::string, model_spec> kPresets = {
    {"opt-13b",
     {"opt-13b", 40, 5120, 20480, 40, 50272, 2050, 5120, 5120,
      norm_kind::standard}},
    {"opt-30b",
     {"opt-30b", 48, 7168, 28672, 56, 50272, 2050, 7168, 7168,
      norm_kind::standard}},
    {"opt-66b",
     {"opt-66b", 64, 9216, 36864, 72, 50272, 2050, 9216, 9216,
      norm_kind::standard}},
    {"bloom-176b",
     {"bloom-176b", 70, 14336, 57344, 112, 250880, 1, 14336, 14336,
      norm_kind::standard}},
    {"tiny-test",
     {"tiny-test", 4, 8, 32, 2, 16, 8, 8, 8, norm_kind::standard}},
};

norm_kind parse_norm(const std::string& s) {
    if (s == "standard") return norm_kind::standard;
    if (s == "rms") return norm_kind::rms;
    fail(fmt::format("config: unknown norm kind '{}'", s));
    return norm_kind::standard;  // unreachable
}

std::string norm_name(norm_kind k) {
    return k == norm_kind::standard ? "standard" : "rms";
}

ordered_json parse_json_or_fail(const std::string& text, const char* what) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded())
        fail(fmt::format("{}: malformed JSON document", what));
    return j;
}

model_spec model_from_json(const ordered_json& j) {
    if (j.contains("preset")) return model_preset(j.at("preset"));
    model_spec m;
    m.name = j.value("name", "custom");
    m.num_layers = j.at("num_layers");
    m.h1 = j.at("h1");
    m.h2 = j.at("h2");
    m.num_heads = j.at("num_heads");
    m.vocab_s = j.at("vocab_s");
    m.pos_s = j.at("pos_s");
    m.d_t = j.value("d_t", m.h1);
    m.d_p = j.value("d_p", m.d_t);
    m.norm = parse_norm(j.value("norm", "standard"));
    return m;
}

ordered_json model_to_json(const model_spec& m) {
    ordered_json j;
    j["name"] = m.name;
    j["num_layers"] = m.num_layers;
    j["h1"] = m.h1;
    j["h2"] = m.h2;
    j["num_heads"] = m.num_heads;
    j["vocab_s"] = m.vocab_s;
    j["pos_s"] = m.pos_s;
    j["d_t"] = m.d_t;
    j["d_p"] = m.d_p;
    j["norm"] = norm_name(m.norm);
    return j;
}

cluster_spec cluster_from_json(const ordered_json& j,
                               const bitwidth_set& default_bits) {
    cluster_spec c;
    if (!j.contains("devices") || !j.at("devices").is_array())
        fail("config: cluster.devices must be an array");
    for (const auto& dj : j.at("devices")) {
        device_spec d;
        d.name = dj.at("name");
        if (!dj.at("mem_bytes").is_number_integer())
            fail(fmt::format("config: device '{}' mem_bytes must be integral",
                             d.name));
        d.mem_bytes = dj.at("mem_bytes");
        d.link_bw_bytes_per_s = dj.at("link_bw_bytes_per_s");
        if (dj.contains("supported_bits"))
            d.supported_bits = dj.at("supported_bits").get<std::vector<int>>();
        else
            d.supported_bits = default_bits;
        std::sort(d.supported_bits.begin(), d.supported_bits.end());
        c.devices.push_back(std::move(d));
    }
    if (j.contains("pairwise_bw"))
        c.pairwise_bw =
            j.at("pairwise_bw").get<std::vector<std::vector<double>>>();
    validate_cluster(c);
    return c;
}

ordered_json cluster_to_json(const cluster_spec& c) {
    ordered_json j;
    j["devices"] = ordered_json::array();
    for (const auto& d : c.devices) {
        ordered_json dj;
        dj["name"] = d.name;
        dj["mem_bytes"] = d.mem_bytes;
        dj["link_bw_bytes_per_s"] = d.link_bw_bytes_per_s;
        dj["supported_bits"] = d.supported_bits;
        j["devices"].push_back(std::move(dj));
    }
    if (!c.pairwise_bw.empty()) j["pairwise_bw"] = c.pairwise_bw;
    return j;
}

}  // namespace

model_spec model_preset(const std::string& name) {
    auto it = kPresets.find(name);
    if (it == kPresets.end())
        fail(fmt::format("config: unknown model preset '{}'", name));
    return it->second;
}

bool has_model_preset(const std::string& name) {
    return kPresets.count(name) != 0;
}

run_setup parse_config(const std::string& text) {
    ordered_json j = parse_json_or_fail(text, "config");
    run_setup rs;
    try {
        rs.bits = j.contains("bits") ? j.at("bits").get<bitwidth_set>()
                                     : bitwidth_set{3, 4, 8, 16};
        std::sort(rs.bits.begin(), rs.bits.end());
        validate_bits(rs.bits);
        rs.model = model_from_json(j.at("model"));
        validate_model(rs.model);
        rs.cluster = cluster_from_json(j.at("cluster"), rs.bits);
        const auto& wj = j.at("workload");
        rs.load.global_bz = wj.at("B");
        rs.load.prompt_len = wj.at("s");
        rs.load.gen_len = wj.at("n");
        validate_workload(rs.load);
        for (const auto& d : rs.cluster.devices)
            for (int b : d.supported_bits)
                if (!std::binary_search(rs.bits.begin(), rs.bits.end(), b))
                    fail(fmt::format(
                        "config: device '{}' lists bitwidth {} outside the "
                        "global bit set", d.name, b));
    } catch (const ordered_json::exception& e) {
        fail(fmt::format("config: {}", e.what()));
    }
    return rs;
}

cluster_spec parse_cluster(const std::string& text) {
    ordered_json j = parse_json_or_fail(text, "cluster");
    try {
        return cluster_from_json(j, {});
    } catch (const ordered_json::exception& e) {
        fail(fmt::format("cluster: {}", e.what()));
    }
    return {};  // unreachable
}

std::string serialize_cluster(const cluster_spec& c) {
    return cluster_to_json(c).dump(2) + "\n";
}

std::string serialize_config(const run_setup& rs) {
    ordered_json j;
    j["format_version"] = config_format_version;
    j["model"] = model_to_json(rs.model);
    j["cluster"] = cluster_to_json(rs.cluster);
    j["workload"]["B"] = rs.load.global_bz;
    j["workload"]["s"] = rs.load.prompt_len;
    j["workload"]["n"] = rs.load.gen_len;
    j["bits"] = rs.bits;
    return j.dump(2) + "\n";
}

}  // namespace hetplan
