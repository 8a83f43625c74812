// hetplan: mixed-precision pipeline planning for LLM serving on
// heterogeneous clusters.
//
// Subcommands:
//   plan       search device order x micro-batch sizes x partition x bits
//   fit        fit the latency model from a profile CSV
//   indicator  build the per-layer quantization quality table
//   simulate   discrete-event simulation of a plan (or raw stage costs)
//   report     human-readable tables from plan + simulation documents
//
// Exit codes: 0 success, 2 invalid input, 3 no feasible plan,
// 4 time limit hit (incumbent plan still written).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "hetplan/config.hpp"
#include "hetplan/indicator/indicator.hpp"
#include "hetplan/latcost/latcost.hpp"
#include "hetplan/optimizer/planner.hpp"
#include "hetplan/pipesim/pipesim.hpp"
#include "hetplan/types.hpp"

namespace {

using nlohmann::ordered_json;
using namespace hetplan;

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_infeasible = 3;
constexpr int exit_time_limit = 4;
constexpr int plan_format_version = 1;

std::string read_file(const std::string& path, const char* flag) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument(
            fmt::format("cannot read {} (from {})", path, flag));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument(fmt::format("cannot write {}", path));
    out << text;
    if (!out.flush())
        throw std::invalid_argument(fmt::format("cannot write {}", path));
}

// Synthetic-but-plausible accelerator catalog for flag-style cluster
// definitions (memory capacity, egress link bandwidth, kernels available).
struct catalog_entry {
    std::int64_t mem_bytes;
    double link_bw;
    bitwidth_set bits;
};

const std::map<std::string, catalog_entry>& device_catalog() {
    constexpr std::int64_t GiB = std::int64_t{1} << 30;
    constexpr double tengige = 1.25e9;  // 10 GbE payload bytes/s
    static const std::map<std::string, catalog_entry> cat = {
        {"t4", {16 * GiB, tengige, {3, 4, 8, 16}}},
        {"p100", {16 * GiB, tengige, {8, 16}}},
        {"v100", {32 * GiB, tengige, {4, 8, 16}}},
        {"a100-40g", {40 * GiB, tengige, {3, 4, 8, 16}}},
        {"a100-80g", {80 * GiB, tengige, {3, 4, 8, 16}}},
        {"rtx3090", {24 * GiB, tengige, {3, 4, 8, 16}}},
        {"rtx2080ti", {11 * GiB, tengige, {3, 4, 8, 16}}},
    };
    return cat;
}

// ---- shared option bundles -------------------------------------------------

struct setup_options {
    std::string config_path;
    std::string model_name;
    std::string model_size;
    std::vector<std::string> device_names;
    std::vector<int> device_numbers;
    int global_bz = 0;
    int prompt_len = 0;
    int gen_len = 0;
    std::vector<int> bits{3, 4, 8, 16};
};

void add_setup_flags(CLI::App* cmd, setup_options& so) {
    cmd->add_option("--config", so.config_path,
                    "run configuration JSON (model+cluster+workload+bits); "
                    "overrides the flag-style cluster definition");
    cmd->add_option("--model-name", so.model_name,
                    "model preset name, e.g. opt-13b (or opt with "
                    "--model-size 13b)");
    cmd->add_option("--model-size", so.model_size,
                    "model size suffix combined with --model-name");
    cmd->add_option("--device-names", so.device_names,
                    "device type names from the built-in catalog")
        ->delimiter(',');
    cmd->add_option("--device-numbers", so.device_numbers,
                    "count per device type, aligned with --device-names")
        ->delimiter(',');
    cmd->add_option("--global-bz", so.global_bz, "global batch size B");
    cmd->add_option("--s", so.prompt_len, "prompt length");
    cmd->add_option("--n", so.gen_len, "tokens to generate per request");
    cmd->add_option("--bits", so.bits,
                    "candidate bitwidths (must include 16)")
        ->delimiter(',');
}

run_setup resolve_setup(const setup_options& so) {
    if (!so.config_path.empty())
        return parse_config(read_file(so.config_path, "--config"));
    run_setup rs;
    std::string preset = so.model_name;
    if (!so.model_size.empty())
        preset = fmt::format("{}-{}", so.model_name, so.model_size);
    if (preset.empty())
        throw std::invalid_argument(
            "either --config or --model-name is required");
    rs.model = model_preset(preset);
    if (so.device_names.empty() ||
        so.device_names.size() != so.device_numbers.size())
        throw std::invalid_argument(
            "--device-names and --device-numbers must be non-empty and "
            "aligned");
    rs.bits = so.bits;
    std::sort(rs.bits.begin(), rs.bits.end());
    validate_bits(rs.bits);
    for (size_t k = 0; k < so.device_names.size(); ++k) {
        auto it = device_catalog().find(so.device_names[k]);
        if (it == device_catalog().end())
            throw std::invalid_argument(fmt::format(
                "unknown device type '{}' in --device-names",
                so.device_names[k]));
        if (so.device_numbers[k] <= 0)
            throw std::invalid_argument(
                "--device-numbers entries must be positive");
        device_spec d;
        d.name = so.device_names[k];
        d.mem_bytes = it->second.mem_bytes;
        d.link_bw_bytes_per_s = it->second.link_bw;
        for (int b : it->second.bits)
            if (std::find(rs.bits.begin(), rs.bits.end(), b) != rs.bits.end())
                d.supported_bits.push_back(b);
        for (int c = 0; c < so.device_numbers[k]; ++c)
            rs.cluster.devices.push_back(d);
    }
    rs.load = {so.global_bz, so.prompt_len, so.gen_len};
    validate_model(rs.model);
    validate_cluster(rs.cluster);
    validate_workload(rs.load);
    return rs;
}

latcost::latency_model resolve_latency_model(const std::string& lat_model_path,
                                             const std::string& profile_path) {
    if (lat_model_path.empty() == profile_path.empty())
        throw std::invalid_argument(
            "exactly one of --lat-model (fitted JSON) or --profile (CSV to "
            "fit) is required");
    if (!lat_model_path.empty())
        return latcost::parse_model(read_file(lat_model_path, "--lat-model"));
    return latcost::fit(
        latcost::ingest_profile(read_file(profile_path, "--profile")));
}

indicator::indicator_table zero_indicator(int num_layers,
                                          const bitwidth_set& bits) {
    indicator::indicator_table t;
    t.bits = bits;
    t.omega.assign(num_layers, std::vector<double>(bits.size(), 0.0));
    return t;
}

// ---- plan document ---------------------------------------------------------

ordered_json plan_to_json(const run_setup& rs, const plan& p, bool optimal,
                          double theta, std::uint64_t seed) {
    ordered_json j;
    j["format_version"] = plan_format_version;
    j["model"] = rs.model.name;
    j["num_layers"] = rs.model.num_layers;
    j["bits"] = rs.bits;
    j["theta"] = theta;
    j["workload"] = {{"global_bz", rs.load.global_bz},
                     {"s", rs.load.prompt_len},
                     {"n", rs.load.gen_len}};
    j["eta"] = p.eta;
    j["xi"] = p.xi;
    j["device_order"] = p.device_order;
    ordered_json names = ordered_json::array();
    for (int d : p.device_order) names.push_back(rs.cluster.devices[d].name);
    j["devices"] = names;
    ordered_json stages = ordered_json::array();
    for (size_t k = 0; k < p.stages.size(); ++k)
        stages.push_back({{"device_index", p.device_order[k]},
                          {"device", rs.cluster.devices[p.device_order[k]].name},
                          {"layers", {p.stages[k].begin, p.stages[k].end}}});
    j["stages"] = stages;
    j["layer_bits"] = p.layer_bits;
    j["objective"] = {{"t_max_pre", p.objective.t_max_pre},
                      {"t_max_dec", p.objective.t_max_dec},
                      {"t_pre_total", p.objective.t_pre_total},
                      {"t_dec_total", p.objective.t_dec_total},
                      {"omega_sum", p.objective.omega_sum},
                      {"theta", p.objective.theta},
                      {"total", p.objective.total}};
    j["optimal"] = optimal;
    j["seed"] = seed;
    return j;
}

struct parsed_plan {
    plan p;
    double theta = 0.0;
    workload load;
    bitwidth_set bits;
    std::string model_name;
};

parsed_plan plan_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(
            fmt::format("plan document is not valid JSON: {}", e.what()));
    }
    try {
        parsed_plan out;
        out.model_name = j.at("model").get<std::string>();
        out.theta = j.at("theta").get<double>();
        out.bits = j.at("bits").get<bitwidth_set>();
        out.load = {j.at("workload").at("global_bz").get<int>(),
                    j.at("workload").at("s").get<int>(),
                    j.at("workload").at("n").get<int>()};
        plan& p = out.p;
        p.eta = j.at("eta").get<int>();
        p.xi = j.at("xi").get<int>();
        p.device_order = j.at("device_order").get<std::vector<int>>();
        for (const auto& st : j.at("stages"))
            p.stages.push_back({st.at("device_index").get<int>(),
                                st.at("layers").at(0).get<int>(),
                                st.at("layers").at(1).get<int>()});
        p.layer_bits = j.at("layer_bits").get<std::vector<int>>();
        const auto& ob = j.at("objective");
        p.objective = {ob.at("t_max_pre").get<double>(),
                       ob.at("t_max_dec").get<double>(),
                       ob.at("t_pre_total").get<double>(),
                       ob.at("t_dec_total").get<double>(),
                       ob.at("omega_sum").get<double>(),
                       ob.at("theta").get<double>(),
                       ob.at("total").get<double>()};
        p.optimal = j.at("optimal").get<bool>();
        return out;
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(
            fmt::format("plan document is missing fields: {}", e.what()));
    }
}

// Rebuild the dense cost instance a plan was scored against, then derive the
// per-stage simulator costs. Used by plan reporting and `simulate --plan`.
struct plan_costs {
    optimizer::ilp_instance inst;
    std::vector<int> boundaries;
    std::vector<int> bit_idx;
    std::vector<pipesim::stage_cost> stages;
};

plan_costs costs_for_plan(const run_setup& rs, const plan& p,
                          const latcost::latency_model& lat,
                          const indicator::indicator_table& omega,
                          double theta) {
    optimizer::instance_inputs in;
    in.model = rs.model;
    in.cluster = rs.cluster;
    in.device_order = p.device_order;
    in.load = rs.load;
    in.bits = rs.bits;
    in.lat = lat;
    in.omega = omega;
    in.theta = theta;
    in.eta = p.eta;
    in.xi = p.xi;
    plan_costs out;
    out.inst = optimizer::build_instance(in);
    for (const auto& st : p.stages) out.boundaries.push_back(st.end);
    for (int b : p.layer_bits) {
        auto it = std::find(rs.bits.begin(), rs.bits.end(), b);
        if (it == rs.bits.end())
            throw std::invalid_argument(
                fmt::format("plan uses bitwidth {} outside the bit set", b));
        out.bit_idx.push_back(static_cast<int>(it - rs.bits.begin()));
    }
    const auto metrics =
        optimizer::per_stage_metrics(out.inst, out.boundaries, out.bit_idx);
    for (size_t j = 0; j < metrics.size(); ++j)
        out.stages.push_back({metrics[j].t_pre, metrics[j].t_dec,
                              out.inst.devices[j].comm_pre_s,
                              out.inst.devices[j].comm_dec_s});
    return out;
}

double simulated_makespan(const plan_costs& pc, const workload& load) {
    const auto sched =
        pipesim::make_schedule(load.global_bz, pc.inst.eta, pc.inst.xi);
    return pipesim::simulate(pc.stages, sched, load.gen_len).makespan_s;
}

double throughput_tok_per_s(const workload& load, double makespan_s) {
    return makespan_s > 0.0
               ? static_cast<double>(load.global_bz) * load.gen_len /
                     makespan_s
               : 0.0;
}

std::string human_bytes(std::int64_t b) {
    const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB"};
    double v = static_cast<double>(b);
    int u = 0;
    while (v >= 1024.0 && u < 4) {
        v /= 1024.0;
        ++u;
    }
    return fmt::format("{:.4g} {}", v, units[u]);
}

void print_plan_report(const run_setup& rs,
                       const optimizer::plan_search_result& res,
                       const plan_costs& pc, double sim_s, double analytic_s) {
    const plan& p = res.best;
    fmt::print("plan: {} stages, eta={} xi={}, objective {:.6g} s{}\n",
               p.stages.size(), p.eta, p.xi, p.objective.total,
               res.optimal ? " (proven optimal)"
                           : (res.timed_out ? " (time-limit incumbent)"
                                            : " (heuristic)"));
    const auto metrics =
        optimizer::per_stage_metrics(pc.inst, pc.boundaries, pc.bit_idx);
    for (size_t k = 0; k < p.stages.size(); ++k) {
        std::map<int, int> hist;
        for (int i = p.stages[k].begin; i < p.stages[k].end; ++i)
            ++hist[p.layer_bits[i]];
        std::string bits_s;
        for (auto [b, c] : hist)
            bits_s += fmt::format("{}{}x{}b", bits_s.empty() ? "" : " ", c, b);
        fmt::print(
            "  stage {}: {:<10} layers [{:>2},{:>2})  {:<14} mem {} / {}  "
            "t_pre {:.4g}s t_dec {:.4g}s\n",
            k, rs.cluster.devices[p.device_order[k]].name, p.stages[k].begin,
            p.stages[k].end, bits_s, human_bytes(metrics[k].mem_used),
            human_bytes(metrics[k].mem_budget), metrics[k].t_pre,
            metrics[k].t_dec);
    }
    const auto& ob = p.objective;
    fmt::print(
        "  breakdown: t_max_pre {:.6g}  t_max_dec {:.6g}  sum_pre {:.6g}  "
        "sum_dec {:.6g}  omega_sum {:.6g} (theta {:g})\n",
        ob.t_max_pre, ob.t_max_dec, ob.t_pre_total, ob.t_dec_total,
        ob.omega_sum, ob.theta);
    fmt::print(
        "  latency: analytic {:.6g} s, simulated {:.6g} s, throughput {:.4g} "
        "tok/s\n",
        analytic_s, sim_s, throughput_tok_per_s(rs.load, sim_s));
}

// ---- subcommand implementations --------------------------------------------

struct plan_args {
    setup_options setup;
    std::string omega_file;
    std::string lat_model_path;
    std::string profile_path;
    std::string output = "plan.json";
    double theta = 0.0;
    int group = 1;
    bool heuristic = false;
    double time_limit_s = 60.0;
    int ordering_cap = 720;
    bool compare_baselines = false;
    std::uint64_t seed = 0;
};

int cmd_plan(const plan_args& a) {
    run_setup rs = resolve_setup(a.setup);
    auto lat = resolve_latency_model(a.lat_model_path, a.profile_path);
    auto omega = indicator::parse_indicator_table(
        read_file(a.omega_file, "--omega-file"));
    if (omega.num_layers() != rs.model.num_layers)
        throw std::invalid_argument(fmt::format(
            "--omega-file covers {} layers but the model has {}",
            omega.num_layers(), rs.model.num_layers));
    if (omega.bits != rs.bits)
        throw std::invalid_argument(
            "--omega-file bit columns do not match the run's bit set");

    optimizer::plan_options opt;
    opt.theta = a.theta;
    opt.group = a.group;
    opt.heuristic = a.heuristic;
    opt.time_limit_s = a.time_limit_s;
    opt.ordering_cap = a.ordering_cap;

    const auto res =
        optimizer::best_plan(rs.model, rs.cluster, rs.load, rs.bits, lat,
                             omega, opt);
    if (!res.feasible) {
        fmt::print(stderr,
                   "no feasible plan: no (ordering, partition, bit "
                   "assignment) satisfies the memory budgets\n");
        return exit_infeasible;
    }
    validate_plan(res.best, rs.model.num_layers, rs.load, rs.bits,
                  static_cast<int>(rs.cluster.devices.size()));

    const auto pc = costs_for_plan(rs, res.best, lat, omega, a.theta);
    const double analytic_s = pipesim::analytic_latency(
        pc.stages, rs.load.global_bz, res.best.eta, res.best.xi,
        rs.load.gen_len);
    const double sim_s = simulated_makespan(pc, rs.load);

    ordered_json doc = plan_to_json(rs, res.best, res.optimal, a.theta, a.seed);
    doc["analytic_latency_s"] = analytic_s;
    doc["simulated_latency_s"] = sim_s;
    doc["throughput_tok_per_s"] = throughput_tok_per_s(rs.load, sim_s);
    write_file(a.output, doc.dump(2) + "\n");

    print_plan_report(rs, res, pc, sim_s, analytic_s);

    if (a.compare_baselines) {
        optimizer::plan_options bopt = opt;
        bopt.theta = 0.0;
        struct row {
            const char* name;
            optimizer::plan_search_result r;
        };
        row rows[] = {
            {"uniform", optimizer::uniform_baseline(rs.model, rs.cluster,
                                                    rs.load, rs.bits, lat,
                                                    omega, bopt)},
            {"pipeedge-style",
             optimizer::pipeedge_baseline(rs.model, rs.cluster, rs.load,
                                          rs.bits, lat, omega, bopt)},
        };
        fmt::print("baselines:\n");
        for (const auto& r : rows) {
            if (!r.r.feasible) {
                fmt::print("  {:<15} infeasible\n", r.name);
                continue;
            }
            const auto bpc =
                costs_for_plan(rs, r.r.best, lat, omega, 0.0);
            const double bsim = simulated_makespan(bpc, rs.load);
            fmt::print(
                "  {:<15} simulated {:.6g} s  throughput {:.4g} tok/s  "
                "(ours {:.2f}x)\n",
                r.name, bsim, throughput_tok_per_s(rs.load, bsim),
                bsim / sim_s);
        }
    }
    fmt::print("plan written to {}\n", a.output);
    return res.timed_out ? exit_time_limit : exit_ok;
}

struct fit_args {
    std::string profile_path;
    std::string output = "lat_model.json";
};

int cmd_fit(const fit_args& a) {
    const auto samples =
        latcost::ingest_profile(read_file(a.profile_path, "--profile"));
    const auto model = latcost::fit(samples);
    write_file(a.output, latcost::serialize_model(model));
    fmt::print("fitted {} groups from {} samples\n", model.coeffs.size(),
               samples.size());
    for (const auto& [key, rs] : model.residuals)
        fmt::print("  {:<12} bit {:>2} {}  n={:<3} max|r| {:.3g}  rmse {:.3g}\n",
                   key.device, key.bit,
                   key.ph == latcost::phase::prefill ? "prefill" : "decode ",
                   rs.n, rs.max_abs, rs.rmse);
    fmt::print("model written to {}\n", a.output);
    return exit_ok;
}

struct indicator_args {
    std::string stats_path;
    std::vector<int> bits{3, 4, 8, 16};
    std::string scheme = "symmetric";
    std::string rounding = "nearest";
    std::string output = "omega.csv";
};

int cmd_indicator(const indicator_args& a) {
    const auto layers =
        indicator::parse_layer_stats(read_file(a.stats_path, "--stats"));
    indicator::quantizer_spec q;
    if (a.scheme == "symmetric")
        q.scheme = indicator::quant_scheme::symmetric;
    else if (a.scheme == "asymmetric")
        q.scheme = indicator::quant_scheme::asymmetric;
    else
        throw std::invalid_argument(
            "--scheme must be symmetric or asymmetric");
    if (a.rounding == "nearest")
        q.rounding = indicator::rounding_mode::nearest;
    else if (a.rounding == "stochastic")
        q.rounding = indicator::rounding_mode::stochastic;
    else
        throw std::invalid_argument(
            "--rounding must be nearest or stochastic");
    bitwidth_set bits = a.bits;
    std::sort(bits.begin(), bits.end());
    validate_bits(bits);
    const auto table = indicator::build_indicator_table(layers, bits, q);
    write_file(a.output, indicator::serialize_indicator_table(table));
    fmt::print("indicator table: {} layers x {} bitwidths written to {}\n",
               table.num_layers(), bits.size(), a.output);
    return exit_ok;
}

struct simulate_args {
    std::string plan_path;
    setup_options setup;
    std::string omega_file;
    std::string lat_model_path;
    std::string profile_path;
    std::string stages_path;
    int eta = 0;
    int xi = 0;
    std::string output = "sim.json";
    std::string timeline_path;
};

std::vector<pipesim::stage_cost> parse_stage_costs(const std::string& text) {
    std::vector<pipesim::stage_cost> out;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        line != "pre_s,dec_s,comm_pre_s,comm_dec_s")
        throw std::invalid_argument(
            "stage costs CSV must start with header "
            "pre_s,dec_s,comm_pre_s,comm_dec_s");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        pipesim::stage_cost c;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf%c", &c.pre_s, &c.dec_s,
                        &c.comm_pre_s, &c.comm_dec_s, &extra) != 4)
            throw std::invalid_argument(
                fmt::format("stage costs CSV line {}: malformed row", lineno));
        out.push_back(c);
    }
    return out;
}

int cmd_simulate(const simulate_args& a) {
    std::vector<pipesim::stage_cost> stages;
    int B = 0, eta = 0, xi = 0, n = 0;
    double analytic = 0.0;
    if (!a.stages_path.empty()) {
        stages = parse_stage_costs(read_file(a.stages_path, "--stages"));
        B = a.setup.global_bz;
        eta = a.eta;
        xi = a.xi;
        n = a.setup.gen_len;
        if (B <= 0 || eta <= 0 || xi <= 0 || n <= 0)
            throw std::invalid_argument(
                "--stages mode needs --global-bz, --eta, --xi and --n");
    } else if (!a.plan_path.empty()) {
        const auto pp = plan_from_json(read_file(a.plan_path, "--plan"));
        run_setup rs = resolve_setup(a.setup);
        auto lat = resolve_latency_model(a.lat_model_path, a.profile_path);
        auto omega = a.omega_file.empty()
                         ? zero_indicator(rs.model.num_layers, rs.bits)
                         : indicator::parse_indicator_table(
                               read_file(a.omega_file, "--omega-file"));
        const auto pc = costs_for_plan(rs, pp.p, lat, omega, pp.theta);
        stages = pc.stages;
        B = rs.load.global_bz;
        eta = pp.p.eta;
        xi = pp.p.xi;
        n = rs.load.gen_len;
    } else {
        throw std::invalid_argument("need --plan or --stages");
    }
    analytic = pipesim::analytic_latency(stages, B, eta, xi, n);
    const auto sched = pipesim::make_schedule(B, eta, xi);
    const auto rep =
        pipesim::simulate(stages, sched, n, !a.timeline_path.empty());
    write_file(a.output, pipesim::serialize_report(rep, analytic));
    if (!a.timeline_path.empty())
        write_file(a.timeline_path, pipesim::timeline_csv(rep));
    fmt::print(
        "simulated {} stages: makespan {:.6g} s, analytic {:.6g} s, bubble "
        "fraction {:.3g}\n",
        stages.size(), rep.makespan_s, analytic, rep.bubble_fraction);
    fmt::print("report written to {}\n", a.output);
    return exit_ok;
}

struct report_args {
    std::string plan_path;
    std::string sim_path;
    std::string csv_path;
};

int cmd_report(const report_args& a) {
    const auto pp = plan_from_json(read_file(a.plan_path, "--plan"));
    ordered_json sim;
    try {
        sim = ordered_json::parse(read_file(a.sim_path, "--sim"));
    } catch (const std::exception& e) {
        throw std::invalid_argument(
            fmt::format("simulation document is not valid JSON: {}", e.what()));
    }
    const double makespan = sim.at("makespan_s").get<double>();
    const double analytic = sim.at("analytic_s").get<double>();
    const auto busy = sim.at("stage_busy_s").get<std::vector<double>>();

    fmt::print("model {}  B={} s={} n={}  theta={:g}\n", pp.model_name,
               pp.load.global_bz, pp.load.prompt_len, pp.load.gen_len,
               pp.theta);
    fmt::print("micro-batches: prefill eta={} decode xi={}\n", pp.p.eta,
               pp.p.xi);
    fmt::print("{:<6} {:<8} {:<10} {:<12}\n", "stage", "layers", "bits",
               "busy_s");
    for (size_t k = 0; k < pp.p.stages.size(); ++k) {
        std::map<int, int> hist;
        for (int i = pp.p.stages[k].begin; i < pp.p.stages[k].end; ++i)
            ++hist[pp.p.layer_bits[i]];
        std::string bits_s;
        for (auto [b, c] : hist)
            bits_s += fmt::format("{}{}x{}b", bits_s.empty() ? "" : " ", c, b);
        fmt::print("{:<6} [{},{})   {:<10} {:<12.6g}\n", k,
                   pp.p.stages[k].begin, pp.p.stages[k].end, bits_s,
                   k < busy.size() ? busy[k] : 0.0);
    }
    const double tput = throughput_tok_per_s(pp.load, makespan);
    fmt::print(
        "latency: simulated {:.6g} s, analytic {:.6g} s (gap {:+.3g}%)\n",
        makespan, analytic,
        analytic > 0.0 ? (makespan - analytic) / analytic * 100.0 : 0.0);
    fmt::print("throughput: {:.6g} tokens/s  (B*n = {})\n", tput,
               pp.load.global_bz * pp.load.gen_len);
    if (!a.csv_path.empty()) {
        std::string csv = "stage,begin,end,busy_s,utilization\n";
        for (size_t k = 0; k < pp.p.stages.size(); ++k) {
            const double b = k < busy.size() ? busy[k] : 0.0;
            csv += fmt::format("{},{},{},{:.17g},{:.17g}\n", k,
                               pp.p.stages[k].begin, pp.p.stages[k].end, b,
                               makespan > 0.0 ? b / makespan : 0.0);
        }
        write_file(a.csv_path, csv);
        fmt::print("plot data written to {}\n", a.csv_path);
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "hetplan: mixed-precision pipeline planning for LLM serving on "
        "heterogeneous clusters"};
    app.require_subcommand(1);

    plan_args pa;
    auto* plan_cmd = app.add_subcommand(
        "plan", "search for the best serving plan and write it as JSON");
    add_setup_flags(plan_cmd, pa.setup);
    plan_cmd->add_option("--omega-file", pa.omega_file,
                         "per-layer quantization quality table (CSV)")
        ->required();
    plan_cmd->add_option("--lat-model", pa.lat_model_path,
                         "fitted latency model JSON");
    plan_cmd->add_option("--profile", pa.profile_path,
                         "kernel profile CSV to fit on the fly");
    plan_cmd->add_option("--theta", pa.theta,
                         "quality-vs-latency tradeoff weight (>= 0)");
    plan_cmd->add_option("--group", pa.group,
                         "fuse consecutive layers into groups of this size");
    plan_cmd->add_flag("--heuristic", pa.heuristic,
                       "skip the exact solver (quality start + local search)");
    plan_cmd->add_option("--time-limit-s", pa.time_limit_s,
                         "wall-clock limit per exact solve");
    plan_cmd->add_option("--ordering-cap", pa.ordering_cap,
                         "max device orderings to try");
    plan_cmd->add_flag("--compare-baselines", pa.compare_baselines,
                       "also plan and simulate the two reference baselines");
    plan_cmd->add_option("--seed", pa.seed,
                         "recorded in the plan document (all subcommands are "
                         "deterministic)");
    plan_cmd->add_option("--output", pa.output, "plan document path");

    fit_args fa;
    auto* fit_cmd =
        app.add_subcommand("fit", "fit the latency model from a profile CSV");
    fit_cmd->add_option("--profile", fa.profile_path, "profile CSV")
        ->required();
    fit_cmd->add_option("--output", fa.output, "fitted model JSON path");

    indicator_args ia;
    auto* ind_cmd = app.add_subcommand(
        "indicator", "build the per-layer quantization quality table");
    ind_cmd->add_option("--stats", ia.stats_path,
                        "calibration statistics CSV")
        ->required();
    ind_cmd->add_option("--bits", ia.bits, "bitwidths (must include 16)")
        ->delimiter(',');
    ind_cmd->add_option("--scheme", ia.scheme, "symmetric | asymmetric");
    ind_cmd->add_option("--rounding", ia.rounding, "nearest | stochastic");
    ind_cmd->add_option("--output", ia.output, "indicator CSV path");

    simulate_args sa;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "discrete-event simulation of a plan or raw stage costs");
    sim_cmd->add_option("--plan", sa.plan_path, "plan document JSON");
    add_setup_flags(sim_cmd, sa.setup);
    sim_cmd->add_option("--omega-file", sa.omega_file,
                        "indicator CSV (optional; zeros when omitted)");
    sim_cmd->add_option("--lat-model", sa.lat_model_path,
                        "fitted latency model JSON");
    sim_cmd->add_option("--profile", sa.profile_path,
                        "kernel profile CSV to fit on the fly");
    sim_cmd->add_option("--stages", sa.stages_path,
                        "raw per-stage costs CSV "
                        "(pre_s,dec_s,comm_pre_s,comm_dec_s)");
    sim_cmd->add_option("--eta", sa.eta, "prefill micro-batch (stages mode)");
    sim_cmd->add_option("--xi", sa.xi, "decode micro-batch (stages mode)");
    sim_cmd->add_option("--timeline", sa.timeline_path,
                        "also write the event timeline CSV here");
    sim_cmd->add_option("--output", sa.output, "simulation report JSON path");

    report_args ra;
    auto* rep_cmd = app.add_subcommand(
        "report", "render tables from plan + simulation documents");
    rep_cmd->add_option("--plan", ra.plan_path, "plan document JSON")
        ->required();
    rep_cmd->add_option("--sim", ra.sim_path, "simulation report JSON")
        ->required();
    rep_cmd->add_option("--csv", ra.csv_path, "also write plot-data CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (plan_cmd->parsed()) return cmd_plan(pa);
        if (fit_cmd->parsed()) return cmd_fit(fa);
        if (ind_cmd->parsed()) return cmd_indicator(ia);
        if (sim_cmd->parsed()) return cmd_simulate(sa);
        if (rep_cmd->parsed()) return cmd_report(ra);
    } catch (const infeasible_error& e) {
        fmt::print(stderr, "infeasible: {}\n", e.what());
        return exit_infeasible;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_invalid;
    }
    return exit_invalid;
}
