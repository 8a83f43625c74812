#include "hetplan/indicator/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace hetplan::indicator {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// Quantize one weight vector to `bit` bits; returns the dequantized values.
// Round-to-nearest uses half-up ties so the error never exceeds step/2.
std::vector<double> quantize(const std::vector<double>& w, int bit,
                             const quantizer_spec& q, std::mt19937_64* rng) {
    if (bit == 16) return w;  // reference precision: untouched
    const auto [mn_it, mx_it] = std::minmax_element(w.begin(), w.end());
    const double w_min = *mn_it, w_max = *mx_it;
    const double step = scaling_factor(w_min, w_max, bit, q.scheme);
    double zero = 0.0;   // grid origin
    double lo = 0.0, hi = 0.0;  // integer grid bounds
    if (q.scheme == quant_scheme::asymmetric) {
        zero = w_min;
        lo = 0.0;
        hi = std::pow(2.0, bit) - 1.0;
    } else {
        zero = 0.0;
        hi = std::pow(2.0, bit - 1) - 1.0;
        lo = -hi;
    }
    std::vector<double> out(w.size());
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (size_t i = 0; i < w.size(); ++i) {
        if (step == 0.0) {  // degenerate flat range: everything maps to zero
            out[i] = zero;
            continue;
        }
        const double scaled = (w[i] - zero) / step;
        double snapped;
        if (q.rounding == rounding_mode::nearest) {
            snapped = std::floor(scaled + 0.5);
        } else {
            const double base = std::floor(scaled);
            const double p = scaled - base;
            snapped = base + (uni(*rng) < p ? 1.0 : 0.0);
        }
        snapped = std::clamp(snapped, lo, hi);
        out[i] = zero + snapped * step;
    }
    return out;
}

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

double indicator_table::at(int layer, int bit) const {
    auto it = std::find(bits.begin(), bits.end(), bit);
    if (it == bits.end())
        fail(fmt::format("indicator: bit {} not in table", bit));
    return omega.at(layer).at(it - bits.begin());
}

double scaling_factor(double w_min, double w_max, int bit,
                      quant_scheme scheme) {
    if (bit < 2) fail("indicator: bitwidth must be at least 2");
    if (bit > 16) fail("indicator: bitwidth above the 16-bit reference");
    if (w_max < w_min) fail("indicator: inverted weight range");
    if (scheme == quant_scheme::asymmetric)
        return (w_max - w_min) / (std::pow(2.0, bit) - 1.0);
    return std::max(std::abs(w_max), std::abs(w_min)) /
           (std::pow(2.0, bit - 1) - 1.0);
}

double g_of_x(double x_mean, double x_var, rounding_mode rounding) {
    if (x_var < 0.0) fail("indicator: negative input variance");
    if (rounding == rounding_mode::nearest) return x_var / 4.0;
    return (x_mean * x_mean + x_var) / 6.0;
}

double layer_indicator(const layer_stats& ops, int bit,
                       const quantizer_spec& q) {
    if (bit == 16) return 0.0;
    double acc = 0.0;
    for (const auto& op : ops) {
        if (op.d_w <= 0) fail(fmt::format(
            "indicator: operator '{}' has nonpositive weight count", op.op));
        const double s = scaling_factor(op.w_min, op.w_max, bit, q.scheme);
        acc += static_cast<double>(op.d_w) * s * s *
               g_of_x(op.x_mean, op.x_var, q.rounding);
    }
    return acc;
}

indicator_table build_indicator_table(const std::vector<layer_stats>& layers,
                                      const bitwidth_set& bits,
                                      const quantizer_spec& q) {
    validate_bits(bits);
    indicator_table t;
    t.bits = bits;
    t.omega.reserve(layers.size());
    for (const auto& ls : layers) {
        std::vector<double> row;
        row.reserve(bits.size());
        for (int b : bits) row.push_back(layer_indicator(ls, b, q));
        t.omega.push_back(std::move(row));
    }
    return t;
}

std::vector<layer_stats> parse_layer_stats(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) fail("calibration stats: empty document");
    {
        auto hdr = split_csv(line);
        const std::vector<std::string> want = {
            "layer", "operator", "d_w", "w_min", "w_max", "x_mean", "x_var"};
        if (hdr != want)
            fail("calibration stats: header must be "
                 "layer,operator,d_w,w_min,w_max,x_mean,x_var");
    }
    std::map<int, layer_stats> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cols = split_csv(line);
        if (cols.size() != 7)
            fail(fmt::format("calibration stats: line {}: expected 7 columns",
                             lineno));
        try {
            const int layer = std::stoi(cols[0]);
            operator_stats os;
            os.op = cols[1];
            os.d_w = std::stoll(cols[2]);
            os.w_min = std::stod(cols[3]);
            os.w_max = std::stod(cols[4]);
            os.x_mean = std::stod(cols[5]);
            os.x_var = std::stod(cols[6]);
            if (layer < 0) fail("negative layer index");
            if (os.d_w <= 0) fail("nonpositive d_w");
            if (os.w_max < os.w_min) fail("inverted weight range");
            if (os.x_var < 0) fail("negative x_var");
            rows[layer].push_back(std::move(os));
        } catch (const std::invalid_argument& e) {
            fail(fmt::format("calibration stats: line {}: {}", lineno,
                             e.what()));
        }
    }
    if (rows.empty()) fail("calibration stats: no rows");
    std::vector<layer_stats> out;
    out.reserve(rows.size());
    int expect = 0;
    for (auto& [layer, ls] : rows) {
        if (layer != expect++)
            fail(fmt::format("calibration stats: layer indices must form a "
                             "contiguous 0-based range (missing {})",
                             expect - 1));
        out.push_back(std::move(ls));
    }
    return out;
}

std::string serialize_indicator_table(const indicator_table& t) {
    std::string out = "layer";
    for (int b : t.bits) out += fmt::format(",bit_{}", b);
    out += "\n";
    for (int i = 0; i < t.num_layers(); ++i) {
        out += fmt::format("{}", i);
        for (double v : t.omega[i]) out += fmt::format(",{:.17g}", v);
        out += "\n";
    }
    return out;
}

indicator_table parse_indicator_table(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) fail("indicator table: empty document");
    indicator_table t;
    {
        auto hdr = split_csv(line);
        if (hdr.size() < 2 || hdr[0] != "layer")
            fail("indicator table: header must start with 'layer'");
        for (size_t i = 1; i < hdr.size(); ++i) {
            if (hdr[i].rfind("bit_", 0) != 0)
                fail("indicator table: bit columns must be named bit_<b>");
            t.bits.push_back(std::stoi(hdr[i].substr(4)));
        }
    }
    int lineno = 1;
    int expect = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cols = split_csv(line);
        if (cols.size() != t.bits.size() + 1)
            fail(fmt::format("indicator table: line {}: wrong column count",
                             lineno));
        if (std::stoi(cols[0]) != expect++)
            fail(fmt::format("indicator table: line {}: layers must be "
                             "contiguous from 0", lineno));
        std::vector<double> row;
        for (size_t i = 1; i < cols.size(); ++i)
            row.push_back(std::stod(cols[i]));
        t.omega.push_back(std::move(row));
    }
    if (t.omega.empty()) fail("indicator table: no rows");
    return t;
}

mc_variance mc_output_variance(const std::vector<double>& weights,
                               double x_mean, double x_var, int bit,
                               const quantizer_spec& q, std::int64_t n_samples,
                               std::uint64_t seed) {
    if (weights.empty()) fail("mc oracle: empty weight vector");
    if (x_var < 0.0) fail("mc oracle: negative input variance");
    if (n_samples < 2) fail("mc oracle: need at least 2 samples");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(x_mean, std::sqrt(x_var));

    const size_t d = weights.size();
    const bool redraw = q.rounding == rounding_mode::stochastic && bit != 16;
    std::vector<double> qw = quantize(weights, bit, q, &rng);

    // online moments: M2/M4 for the total, M2 for the perturbation
    double mean_t = 0.0, m2_t = 0.0, m3_t = 0.0, m4_t = 0.0;
    double mean_e = 0.0, m2_e = 0.0;
    for (std::int64_t k = 0; k < n_samples; ++k) {
        if (redraw) qw = quantize(weights, bit, q, &rng);
        double y_full = 0.0, y_base = 0.0;
        for (size_t i = 0; i < d; ++i) {
            const double x = gauss(rng);
            y_full += qw[i] * x;
            y_base += weights[i] * x;
        }
        const double n1 = static_cast<double>(k + 1);
        {
            const double delta = y_full - mean_t;
            const double dn = delta / n1;
            const double term = delta * dn * k;
            mean_t += dn;
            m4_t += term * dn * dn * (n1 * n1 - 3.0 * n1 + 3.0) +
                    6.0 * dn * dn * m2_t - 4.0 * dn * m3_t;
            m3_t += term * dn * (n1 - 2.0) - 3.0 * dn * m2_t;
            m2_t += term;
        }
        {
            const double e = y_full - y_base;
            const double delta = e - mean_e;
            mean_e += delta / n1;
            m2_e += delta * (e - mean_e);
        }
    }
    mc_variance out;
    out.n = n_samples;
    const double n = static_cast<double>(n_samples);
    out.total_var = m2_t / (n - 1.0);
    out.extra_var = m2_e / (n - 1.0);
    const double m4 = m4_t / n;
    const double v2 = out.total_var * out.total_var;
    out.se_total = std::sqrt(std::max(0.0, m4 - v2) / n);
    return out;
}

double exact_base_variance(const std::vector<double>& weights, double x_var) {
    double sumsq = 0.0;
    for (double w : weights) sumsq += w * w;
    return sumsq * x_var;
}

}  // namespace hetplan::indicator
