#include "hetplan/latcost/latcost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

namespace hetplan::latcost {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string phase_name(phase p) {
    return p == phase::prefill ? "prefill" : "decode";
}

phase parse_phase(const std::string& s) {
    if (s == "prefill") return phase::prefill;
    if (s == "decode") return phase::decode;
    throw std::invalid_argument(
        fmt::format("profile: unknown phase '{}'", s));
}

std::string group_label(const group_key& k) {
    return fmt::format("({}, {}-bit, {})", k.device, k.bit, phase_name(k.ph));
}

std::vector<double> features_for(const group_key& k,
                                 const profile_sample& s) {
    if (k.ph == phase::prefill) {
        auto f = prefill_features(s.v, s.s);
        return {f.begin(), f.end()};
    }
    auto f = decode_features(s.v, s.s, s.t);
    return {f.begin(), f.end()};
}

// split a CSV line; no quoting in this format
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::array<double, prefill_feature_count> prefill_features(double v, double s) {
    return {1.0, v, s, v * s, v * s * s};
}

std::array<double, decode_feature_count> decode_features(double v, double s,
                                                         double t) {
    return {1.0, v, v * (t + s), t + s};
}

bool latency_model::has_group(const std::string& device, int bit,
                              phase ph) const {
    return coeffs.count(group_key{device, bit, ph}) != 0;
}

std::vector<profile_sample> ingest_profile(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("profile: empty document");
    {
        auto hdr = split_csv(line);
        const std::vector<std::string> want = {"device", "bit",  "phase", "v",
                                               "s",      "t",    "latency_s"};
        if (hdr != want)
            throw std::invalid_argument(
                "profile: header must be device,bit,phase,v,s,t,latency_s");
    }
    // key -> (sum, count) for duplicate averaging
    std::map<std::tuple<std::string, int, int, int, int, int>,
             std::pair<double, int>> acc;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cols = split_csv(line);
        if (cols.size() != 7)
            throw std::invalid_argument(
                fmt::format("profile: line {}: expected 7 columns", lineno));
        try {
            const std::string& device = cols[0];
            const int bit = std::stoi(cols[1]);
            const phase ph = parse_phase(cols[2]);
            const int v = std::stoi(cols[3]);
            const int s = std::stoi(cols[4]);
            const int t = std::stoi(cols[5]);
            const double lat = std::stod(cols[6]);
            if (device.empty())
                throw std::invalid_argument("empty device name");
            if (v <= 0 || s < 0 || t < 0)
                throw std::invalid_argument("nonpositive workload field");
            if (!(lat > 0.0))
                throw std::invalid_argument("nonpositive latency");
            auto key = std::make_tuple(device, bit, static_cast<int>(ph), v, s, t);
            auto& slot = acc[key];
            slot.first += lat;
            slot.second += 1;
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(
                fmt::format("profile: line {}: {}", lineno, e.what()));
        } catch (const std::out_of_range&) {
            throw std::invalid_argument(
                fmt::format("profile: line {}: value out of range", lineno));
        }
    }
    std::vector<profile_sample> out;
    out.reserve(acc.size());
    for (const auto& [key, sum_count] : acc) {
        profile_sample s;
        s.device = std::get<0>(key);
        s.bit = std::get<1>(key);
        s.ph = static_cast<phase>(std::get<2>(key));
        s.v = std::get<3>(key);
        s.s = std::get<4>(key);
        s.t = std::get<5>(key);
        s.latency_s = sum_count.first / sum_count.second;
        out.push_back(std::move(s));
    }
    return out;
}

latency_model fit(const std::vector<profile_sample>& samples) {
    std::map<group_key, std::vector<const profile_sample*>> groups;
    for (const auto& s : samples)
        groups[group_key{s.device, s.bit, s.ph}].push_back(&s);

    latency_model model;
    for (const auto& [key, rows] : groups) {
        const int nfeat = key.ph == phase::prefill ? prefill_feature_count
                                                   : decode_feature_count;
        const int nrows = static_cast<int>(rows.size());
        if (nrows < nfeat)
            throw std::runtime_error(fmt::format(
                "latency fit: group {} has {} samples but needs at least {}",
                group_label(key), nrows, nfeat));
        Eigen::MatrixXd X(nrows, nfeat);
        Eigen::VectorXd y(nrows);
        for (int r = 0; r < nrows; ++r) {
            auto f = features_for(key, *rows[r]);
            for (int c = 0; c < nfeat; ++c) X(r, c) = f[c];
            y(r) = rows[r]->latency_s;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < nfeat)
            throw std::runtime_error(fmt::format(
                "latency fit: group {} has a rank-deficient design "
                "(rank {} < {}); sample more distinct workloads",
                group_label(key), static_cast<int>(qr.rank()), nfeat));
        Eigen::VectorXd beta = qr.solve(y);
        Eigen::VectorXd resid = y - X * beta;

        residual_stats rs;
        rs.n = nrows;
        rs.max_abs = resid.cwiseAbs().maxCoeff();
        rs.mean_abs = resid.cwiseAbs().mean();
        rs.rmse = std::sqrt(resid.squaredNorm() / nrows);
        model.coeffs[key] = std::vector<double>(beta.data(), beta.data() + nfeat);
        model.residuals[key] = rs;
    }
    return model;
}

namespace {

const std::vector<double>& coeffs_or_throw(const latency_model& m,
                                           const std::string& device, int bit,
                                           phase ph) {
    auto it = m.coeffs.find(group_key{device, bit, ph});
    if (it == m.coeffs.end())
        throw std::runtime_error(fmt::format(
            "latency model: no fitted group {}",
            group_label(group_key{device, bit, ph})));
    return it->second;
}

}  // namespace

double predict_prefill(const latency_model& m, const std::string& device,
                       int bit, double v, double s) {
    const auto& c = coeffs_or_throw(m, device, bit, phase::prefill);
    auto f = prefill_features(v, s);
    double acc = 0.0;
    for (int i = 0; i < prefill_feature_count; ++i) acc += c[i] * f[i];
    return std::max(0.0, acc);
}

double predict_decode(const latency_model& m, const std::string& device,
                      int bit, double v, double s, double t) {
    const auto& c = coeffs_or_throw(m, device, bit, phase::decode);
    auto f = decode_features(v, s, t);
    double acc = 0.0;
    for (int i = 0; i < decode_feature_count; ++i) acc += c[i] * f[i];
    return std::max(0.0, acc);
}

double shard_latency(const latency_model& m, const std::string& device,
                     const std::vector<int>& layer_bits, phase ph, double v,
                     double s, double n) {
    double acc = 0.0;
    for (int bit : layer_bits) {
        if (ph == phase::prefill)
            acc += predict_prefill(m, device, bit, v, s);
        else
            acc += predict_decode(m, device, bit, v, s, n / 2.0);
    }
    return acc;
}

std::string serialize_model(const latency_model& m) {
    ordered_json j;
    j["format_version"] = latency_model_format_version;
    j["features"] = {{"prefill", "1,v,s,v*s,v*s^2"},
                     {"decode", "1,v,v*(t+s),(t+s)"}};
    j["groups"] = ordered_json::array();
    for (const auto& [key, coeffs] : m.coeffs) {
        ordered_json g;
        g["device"] = key.device;
        g["bit"] = key.bit;
        g["phase"] = phase_name(key.ph);
        g["coeffs"] = coeffs;
        const auto& rs = m.residuals.at(key);
        g["residuals"] = {{"max_abs", rs.max_abs},
                          {"mean_abs", rs.mean_abs},
                          {"rmse", rs.rmse},
                          {"n", rs.n}};
        j["groups"].push_back(std::move(g));
    }
    return j.dump(2) + "\n";
}

latency_model parse_model(const std::string& text) {
    ordered_json j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw std::invalid_argument("latency model: malformed JSON");
    latency_model m;
    try {
        if (j.at("format_version").get<int>() != latency_model_format_version)
            throw std::invalid_argument(
                "latency model: unsupported format_version");
        for (const auto& g : j.at("groups")) {
            group_key key;
            key.device = g.at("device");
            key.bit = g.at("bit");
            key.ph = parse_phase(g.at("phase"));
            auto coeffs = g.at("coeffs").get<std::vector<double>>();
            const size_t want = key.ph == phase::prefill
                                    ? prefill_feature_count
                                    : decode_feature_count;
            if (coeffs.size() != want)
                throw std::invalid_argument(fmt::format(
                    "latency model: group {} has {} coefficients, wants {}",
                    group_label(key), coeffs.size(), want));
            residual_stats rs;
            if (g.contains("residuals")) {
                rs.max_abs = g.at("residuals").value("max_abs", 0.0);
                rs.mean_abs = g.at("residuals").value("mean_abs", 0.0);
                rs.rmse = g.at("residuals").value("rmse", 0.0);
                rs.n = g.at("residuals").value("n", 0);
            }
            m.coeffs[key] = std::move(coeffs);
            m.residuals[key] = rs;
        }
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(
            fmt::format("latency model: {}", e.what()));
    }
    return m;
}

}  // namespace hetplan::latcost
