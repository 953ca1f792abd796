#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modecon/dataset.hpp"
#include "modecon/dropout.hpp"
#include "modecon/error.hpp"
#include "modecon/linalg.hpp"
#include "modecon/net.hpp"
#include "modecon/paths.hpp"
#include "modecon/stability.hpp"

namespace modecon {

using json = nlohmann::json;

// Model JSON: {"dims": [h_0, ..., h_d], "weights": [A_1 row-major, ..., A_d row-major]}.
inline json to_json(const Network& net) {
    json j;
    j["dims"] = net.dims();
    j["weights"] = json::array();
    for (const auto& w : net.weights()) j["weights"].push_back(std::vector<double>(w.data().begin(), w.data().end()));
    return j;
}

inline Network network_from_json(const json& j) {
    try {
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        const auto& ws = j.at("weights");
        if (dims.size() < 3) throw ValidationError("model: dims need at least one hidden layer");
        if (ws.size() != dims.size() - 1)
            throw DimensionError("model: " + std::to_string(ws.size()) + " weight arrays for " +
                                 std::to_string(dims.size() - 1) + " layers");
        std::vector<Matrix> mats;
        for (std::size_t i = 1; i < dims.size(); ++i)
            mats.emplace_back(dims[i], dims[i - 1], ws[i - 1].get<std::vector<double>>());
        return Network(std::move(mats));
    } catch (const json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Network load_network(const std::string& path) { return network_from_json(read_json_file(path)); }

inline void save_network(const Network& net, const std::string& path) { write_text_file(path, to_json(net).dump() + "\n"); }

inline json to_json(const DropoutMask& m) { return {{"keep", m.keep}, {"rescale", m.rescale}}; }

inline DropoutMask mask_from_json(const json& j) {
    try {
        DropoutMask m;
        m.keep = j.at("keep").get<std::vector<std::vector<std::size_t>>>();
        m.rescale = j.at("rescale").get<std::vector<double>>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("mask JSON: ") + e.what());
    }
}

inline json to_json(const PiecewisePath& p) {
    json j;
    j["segments"] = p.segments();
    j["labels"] = json::array();
    for (SegmentKind k : p.labels) j["labels"].push_back(to_string(k));
    j["points"] = json::array();
    for (const auto& n : p.points) j["points"].push_back(to_json(n));
    return j;
}

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// Header t,loss,accuracy; accuracy is empty for regression data.
inline std::string profile_csv(const PathProfile& p) {
    std::ostringstream os;
    os << "t,loss,accuracy\n";
    for (std::size_t k = 0; k < p.ts.size(); ++k) {
        os << format_double(p.ts[k]) << ',' << format_double(p.losses[k]) << ',';
        if (p.accuracies[k]) os << format_double(*p.accuracies[k]);
        os << '\n';
    }
    return os.str();
}

// Columns x1..xn then y1..ym, or x1..xn,label for classification data.
inline std::string dataset_csv(const LabeledDataset& d) {
    std::ostringstream os;
    for (std::size_t c = 0; c < d.input_dim(); ++c) os << (c ? "," : "") << 'x' << c + 1;
    if (d.has_labels()) {
        os << ",label\n";
    } else {
        for (std::size_t c = 0; c < d.target_dim(); ++c) os << ",y" << c + 1;
        os << '\n';
    }
    for (std::size_t s = 0; s < d.size(); ++s) {
        for (std::size_t c = 0; c < d.input_dim(); ++c) os << (c ? "," : "") << format_double(d.inputs[s][c]);
        if (d.has_labels()) {
            os << ',' << d.labels[s];
        } else {
            for (double v : d.targets[s]) os << ',' << format_double(v);
        }
        os << '\n';
    }
    return os.str();
}

// Inverse of dataset_csv. A label column makes a classification set with `classes` classes
// (0 infers max label + 1).
inline LabeledDataset read_dataset_csv(const std::string& path, std::size_t classes = 0) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    std::vector<char> role;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            if (cell == "label") role.push_back('l');
            else if (!cell.empty() && cell[0] == 'x') role.push_back('x');
            else if (!cell.empty() && cell[0] == 'y') role.push_back('y');
            else throw ParseError(path + ": unknown column '" + cell + "' in header");
        }
    }
    const bool classification = std::count(role.begin(), role.end(), 'l') == 1;
    std::vector<Vector> xs, ys;
    std::vector<std::size_t> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        Vector x, y;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= role.size()) throw ParseError(path + ": line " + std::to_string(lineno) + " has extra columns");
            double v;
            try {
                std::size_t used = 0;
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw ParseError(path + ": line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            if (role[col] == 'x') x.push_back(v);
            else if (role[col] == 'y') y.push_back(v);
            else {
                if (v < 0 || v != std::floor(v)) throw ParseError(path + ": line " + std::to_string(lineno) + ": bad label");
                labels.push_back(static_cast<std::size_t>(v));
            }
            ++col;
        }
        if (col != role.size()) throw ParseError(path + ": line " + std::to_string(lineno) + " has missing columns");
        xs.push_back(std::move(x));
        ys.push_back(std::move(y));
    }
    if (xs.empty()) throw ParseError(path + ": no samples");
    if (classification) {
        if (classes == 0) classes = *std::max_element(labels.begin(), labels.end()) + 1;
        return make_classification(std::move(xs), std::move(labels), classes, path);
    }
    return make_regression(std::move(xs), std::move(ys), path);
}

inline std::string values_csv(const std::vector<double>& values) {
    std::ostringstream os;
    os << "value\n";
    for (double v : values) os << format_double(v) << '\n';
    return os.str();
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Distribution& d) {
    return {{"count", d.values.size()},
            {"censored", d.censored},
            {"min", number_or_null(d.min())},
            {"median", number_or_null(d.median())},
            {"max", number_or_null(d.max())}};
}

inline json to_json(const StabilityReport& r) {
    json j;
    j["depth"] = r.depth;
    j["h_min"] = r.h_min;
    j["samples"] = r.samples;
    j["max_output_norm"] = r.max_output_norm;
    j["beta"] = r.beta;
    j["beta_is_data_bound"] = r.beta_is_data_bound;
    j["epsilon"] = number_or_null(r.epsilon);
    j["activation_contraction"] = r.c;
    j["layer_cushion"] = json::array();
    j["minimal_interlayer_cushion"] = json::array();
    for (std::size_t i = 1; i <= r.depth; ++i) {
        j["layer_cushion"].push_back({{"layer", i}, {"min", number_or_null(r.mu[i - 1])},
                                      {"used_in_epsilon", i >= 2}, {"distribution", to_json(r.layer_cushion_dist[i - 1])}});
        j["minimal_interlayer_cushion"].push_back({{"layer", i}, {"value", number_or_null(r.mu_arrow[i - 1])}});
    }
    j["interlayer_cushion"] = json::array();
    for (std::size_t i = 1; i <= r.depth; ++i)
        for (std::size_t jj = i; jj <= r.depth; ++jj) {
            const Distribution& d = r.interlayer_cushion_dist[i - 1][jj - i];
            j["interlayer_cushion"].push_back({{"i", i}, {"j", jj}, {"min", number_or_null(d.min())}, {"distribution", to_json(d)}});
        }
    j["contraction"] = json::array();
    for (std::size_t i = 1; i < r.depth; ++i)
        j["contraction"].push_back({{"layer", i}, {"distribution", to_json(r.contraction_dist[i - 1])}});
    if (r.smoothness) {
        const auto& s = *r.smoothness;
        json sm;
        sm["rho_min"] = number_or_null(s.rho_min);
        sm["rho_median_realization"] = number_or_null(s.rho_median_realization);
        sm["realization_min"] = json::array();
        for (double v : s.realization_min) sm["realization_min"].push_back(number_or_null(v));
        sm["linear_censored"] = s.linear;
        sm["unperturbed"] = s.unperturbed;
        sm["infinity_constant"] = s.infinity_constant;
        sm["infinity_censored"] = s.infinity_censored;
        sm["layers"] = json::array();
        for (std::size_t i = 2; i <= r.depth; ++i)
            sm["layers"].push_back({{"layer", i}, {"distribution", to_json(s.per_layer[i - 1])}});
        j["interlayer_smoothness"] = sm;
    }
    j["side_conditions"] = json::array();
    for (const auto& c : r.conditions)
        j["side_conditions"].push_back(
            {{"name", c.name}, {"measured", c.measured}, {"threshold", c.threshold}, {"status", c.pass ? "pass" : "warn"}});
    return j;
}

// Writes report.json and one value-column CSV per quantity per layer into dir.
inline void write_stability(const StabilityReport& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path base(dir);
    write_text_file((base / "report.json").string(), to_json(r).dump(2) + "\n");
    for (std::size_t i = 1; i <= r.depth; ++i) {
        write_text_file((base / ("layer_cushion_" + std::to_string(i) + ".csv")).string(),
                        values_csv(r.layer_cushion_dist[i - 1].values));
        write_text_file((base / ("minimal_interlayer_cushion_" + std::to_string(i) + ".csv")).string(),
                        values_csv(r.minimal_interlayer_dist[i - 1].values));
        for (std::size_t j = i; j <= r.depth; ++j)
            write_text_file((base / ("interlayer_cushion_" + std::to_string(i) + "_" + std::to_string(j) + ".csv")).string(),
                            values_csv(r.interlayer_cushion_dist[i - 1][j - i].values));
    }
    for (std::size_t i = 1; i < r.depth; ++i)
        write_text_file((base / ("activation_contraction_" + std::to_string(i) + ".csv")).string(),
                        values_csv(r.contraction_dist[i - 1].values));
    if (r.smoothness)
        for (std::size_t i = 2; i <= r.depth; ++i)
            write_text_file((base / ("interlayer_smoothness_" + std::to_string(i) + ".csv")).string(),
                            values_csv(r.smoothness->per_layer[i - 1].values));
}

}  // namespace modecon
