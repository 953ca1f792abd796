#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "modecon/dataset.hpp"
#include "modecon/error.hpp"
#include "modecon/linalg.hpp"
#include "modecon/net.hpp"
#include "modecon/rng.hpp"

namespace modecon {

struct TrainConfig {
    std::vector<std::size_t> dims;  // input, hidden..., output
    double lr = 0.1;
    double decay = 1e-6;            // lr is multiplied by (1 - decay) after every step
    std::size_t batch = 64;
    std::size_t iterations = 5000;
    std::vector<double> dropout;    // per hidden layer; empty or 0 means off, one value applies to all
    double momentum = 0.0;
    std::uint64_t seed = 0;
    LossKind kind = LossKind::squared;

    std::size_t depth() const { return dims.size() - 1; }

    double dropout_at(std::size_t hidden_layer) const {
        if (dropout.empty()) return 0.0;
        return dropout.size() == 1 ? dropout.front() : dropout.at(hidden_layer - 1);
    }

    void validate() const {
        if (dims.size() < 3) throw ValidationError("dims need an input, at least one hidden layer and an output");
        for (std::size_t w : dims)
            if (w == 0) throw ValidationError("dims must be positive");
        if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be positive");
        if (!(decay >= 0.0 && decay < 1.0)) throw ValidationError("decay must lie in [0,1)");
        if (batch < 1) throw ValidationError("batch size must be at least 1");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must lie in [0,1)");
        if (dropout.size() > 1 && dropout.size() != depth() - 1)
            throw ValidationError("dropout needs one value or one per hidden layer (" + std::to_string(depth() - 1) +
                                  ")");
        for (double p : dropout)
            if (!(p >= 0.0 && p < 1.0)) throw ValidationError("dropout probability must lie in [0,1)");
    }
};

// Uniform in ±sqrt(6 / (fan_in + fan_out)) per layer; layer i draws from derive_seed(seed, i).
inline Network glorot_init(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 3) throw ValidationError("glorot_init: need at least one hidden layer");
    std::vector<Matrix> w;
    for (std::size_t i = 1; i < dims.size(); ++i) {
        Rng rng(derive_seed(seed, i));
        const double a = std::sqrt(6.0 / static_cast<double>(dims[i - 1] + dims[i]));
        Matrix m(dims[i], dims[i - 1]);
        for (double& v : m.data()) v = rng.uniform(-a, a);
        w.push_back(std::move(m));
    }
    return Network(std::move(w));
}

// Column scale of each hidden layer's output (index i-1 for layer i); empty means no dropout.
using UnitScales = std::vector<Vector>;

struct LossGradient {
    double value = 0.0;
    std::vector<Matrix> grads;  // index i-1 holds dL/dA_i
};

// Mean loss and gradient over data[indices]. With scales, the input to A_{i+1} is s_i ⊙ φ(x^i).
inline LossGradient loss_gradient(const Network& net, const LabeledDataset& data, std::span<const std::size_t> indices,
                                  LossKind kind, const UnitScales& scales = {}) {
    check_compatible(net, data, kind);
    if (indices.empty()) throw ValidationError("loss_gradient: empty batch");
    const std::size_t d = net.depth();
    LossGradient out;
    for (std::size_t i = 1; i <= d; ++i) out.grads.emplace_back(net.width(i), net.width(i - 1));
    std::vector<Vector> act(d);  // act[i-1] is the input of A_i
    std::vector<Vector> pre(d);
    for (std::size_t s : indices) {
        act[0] = data.inputs.at(s);
        for (std::size_t i = 1; i <= d; ++i) {
            pre[i - 1] = matvec(net.weight(i), act[i - 1]);
            if (i < d) {
                act[i] = relu(pre[i - 1]);
                if (!scales.empty())
                    for (std::size_t u = 0; u < act[i].size(); ++u) act[i][u] *= scales[i - 1][u];
            }
        }
        const Vector& yhat = pre[d - 1];
        const Vector& y = data.targets[s];
        const std::size_t label = data.has_labels() ? data.labels[s] : 0;
        out.value += sample_loss(kind, y, label, yhat);
        Vector g(yhat.size());
        if (kind == LossKind::squared) {
            for (std::size_t k = 0; k < g.size(); ++k) g[k] = 2.0 * (yhat[k] - y[k]);
        } else {
            const double lse = log_sum_exp(yhat);
            for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::exp(yhat[k] - lse) - (k == label ? 1.0 : 0.0);
        }
        for (std::size_t i = d; i >= 1; --i) {
            Matrix& gi = out.grads[i - 1];
            const Vector& a = act[i - 1];
            for (std::size_t r = 0; r < g.size(); ++r) {
                if (g[r] == 0.0) continue;
                auto row = gi.row(r);
                for (std::size_t c = 0; c < a.size(); ++c) row[c] += g[r] * a[c];
            }
            if (i == 1) break;
            Vector back = transpose_matvec(net.weight(i), g);
            const Vector& z = pre[i - 2];
            for (std::size_t u = 0; u < back.size(); ++u) {
                back[u] = z[u] > 0.0 ? back[u] : 0.0;
                if (!scales.empty()) back[u] *= scales[i - 2][u];
            }
            g = std::move(back);
        }
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    out.value *= inv;
    for (auto& m : out.grads)
        for (double& v : m.data()) v *= inv;
    return out;
}

inline LossGradient loss_gradient(const Network& net, const LabeledDataset& data, LossKind kind) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return loss_gradient(net, data, all, kind);
}

struct TrainingDiverged : NumericError {
    std::vector<double> history;
    TrainingDiverged(const std::string& what, std::vector<double> h) : NumericError(what), history(std::move(h)) {}
};

struct TrainResult {
    Network net;
    std::vector<double> history;  // mini-batch loss of every step, before the update
};

// Mini-batch SGD. Batches come from a reshuffled pass over the data (stream derive_seed(seed, 1000));
// dropout masks come from a separate stream (derive_seed(seed, 2000)) and are redrawn per batch.
// Layers with p = 0 draw nothing, so p = 0 everywhere reproduces plain training exactly.
inline TrainResult sgd_train(const TrainConfig& cfg, const LabeledDataset& data) {
    cfg.validate();
    data.validate();
    Network net = glorot_init(cfg.dims, cfg.seed);
    check_compatible(net, data, cfg.kind);
    const std::size_t d = net.depth();
    Rng batch_rng(derive_seed(cfg.seed, 1000));
    Rng drop_rng(derive_seed(cfg.seed, 2000));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();
    std::vector<Matrix> velocity;
    for (std::size_t i = 1; i <= d; ++i) velocity.emplace_back(net.width(i), net.width(i - 1));
    bool any_dropout = false;
    for (std::size_t i = 1; i < d; ++i) any_dropout = any_dropout || cfg.dropout_at(i) > 0.0;

    TrainResult res;
    res.history.reserve(cfg.iterations);
    double lr = cfg.lr;
    std::vector<std::size_t> batch;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        batch.clear();
        while (batch.size() < std::min(cfg.batch, data.size())) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), batch_rng.engine());
                cursor = 0;
            }
            batch.push_back(order[cursor++]);
        }
        UnitScales scales;
        if (any_dropout) {
            for (std::size_t i = 1; i < d; ++i) {
                const double p = cfg.dropout_at(i);
                Vector s(net.width(i), 1.0);
                if (p > 0.0)
                    for (double& v : s) v = drop_rng.uniform() < p ? 0.0 : 1.0 / (1.0 - p);
                scales.push_back(std::move(s));
            }
        }
        LossGradient lg = loss_gradient(net, data, batch, cfg.kind, scales);
        res.history.push_back(lg.value);
        if (!std::isfinite(lg.value))
            throw TrainingDiverged("training diverged at step " + std::to_string(it), std::move(res.history));
        std::vector<Matrix> w = net.weights();
        for (std::size_t i = 0; i < d; ++i) {
            auto vel = velocity[i].data();
            auto g = lg.grads[i].data();
            auto wi = w[i].data();
            for (std::size_t q = 0; q < wi.size(); ++q) {
                vel[q] = cfg.momentum * vel[q] - lr * g[q];
                wi[q] += vel[q];
            }
            if (!all_finite(wi))
                throw TrainingDiverged("training diverged at step " + std::to_string(it), std::move(res.history));
        }
        net = Network(std::move(w));
        lr *= 1.0 - cfg.decay;
    }
    res.net = std::move(net);
    return res;
}

struct TeacherData {
    Network teacher;
    LabeledDataset data;
};

// Teacher with unit-Gaussian weights (depth-1 hidden layers of teacher_width), standard normal inputs and
// targets equal to the teacher's outputs. Weights use derive_seed(seed, i), inputs derive_seed(seed, 0).
inline TeacherData make_teacher_student_data(std::size_t teacher_width, std::size_t input_dim, std::size_t samples,
                                             std::uint64_t seed, std::size_t depth = 3, std::size_t output_dim = 1) {
    if (teacher_width < 1 || input_dim < 1 || output_dim < 1) throw ValidationError("widths must be at least 1");
    if (depth < 2) throw ValidationError("teacher depth must be at least 2");
    std::vector<std::size_t> dims{input_dim};
    for (std::size_t i = 1; i < depth; ++i) dims.push_back(teacher_width);
    dims.push_back(output_dim);
    std::vector<Matrix> w;
    for (std::size_t i = 1; i < dims.size(); ++i) {
        Rng rng(derive_seed(seed, i));
        Matrix m(dims[i], dims[i - 1]);
        for (double& v : m.data()) v = rng.normal();
        w.push_back(std::move(m));
    }
    TeacherData td{Network(std::move(w)), {}};
    Rng rng(derive_seed(seed, 0));
    std::vector<Vector> xs, ys;
    for (std::size_t s = 0; s < samples; ++s) {
        Vector x(input_dim);
        for (double& v : x) v = rng.normal();
        ys.push_back(output(td.teacher, x));
        xs.push_back(std::move(x));
    }
    td.data = make_regression(std::move(xs), std::move(ys), "teacher_student");
    return td;
}

// Two Gaussian blobs at ±separation along the first axis; label 1 for the positive blob.
inline LabeledDataset make_two_blobs(std::size_t samples, std::size_t input_dim, double separation, std::uint64_t seed) {
    if (input_dim < 1) throw ValidationError("input_dim must be at least 1");
    Rng rng(seed);
    std::vector<Vector> xs;
    std::vector<std::size_t> labels;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t c = s % 2;
        Vector x(input_dim);
        for (double& v : x) v = rng.normal();
        x[0] += c == 1 ? separation : -separation;
        xs.push_back(std::move(x));
        labels.push_back(c);
    }
    return make_classification(std::move(xs), std::move(labels), 2, "two_blobs");
}

namespace detail {

inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t offset, const std::string& file) {
    if (offset + 4 > b.size())
        throw ParseError(file + ": truncated at offset " + std::to_string(offset) + " (need 4 bytes)");
    return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
           (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

inline std::vector<unsigned char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

// IDX images (magic 0x00000803, then count, rows, cols) and labels (0x00000801, then count), big-endian.
// Pixels are scaled to [0,1] and flattened row by row.
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path, std::size_t classes = 10) {
    const auto img = detail::read_bytes(images_path);
    const auto lab = detail::read_bytes(labels_path);
    const std::uint32_t mi = detail::read_be32(img, 0, images_path);
    if (mi != 0x00000803) {
        std::ostringstream os;
        os << images_path << ": bad magic 0x" << std::hex << mi << " at offset 0 (expected 0x803)";
        throw ParseError(os.str());
    }
    const std::uint32_t ml = detail::read_be32(lab, 0, labels_path);
    if (ml != 0x00000801) {
        std::ostringstream os;
        os << labels_path << ": bad magic 0x" << std::hex << ml << " at offset 0 (expected 0x801)";
        throw ParseError(os.str());
    }
    const std::size_t n = detail::read_be32(img, 4, images_path);
    const std::size_t rows = detail::read_be32(img, 8, images_path);
    const std::size_t cols = detail::read_be32(img, 12, images_path);
    const std::size_t nl = detail::read_be32(lab, 4, labels_path);
    if (n != nl)
        throw ParseError("image count " + std::to_string(n) + " differs from label count " + std::to_string(nl));
    const std::size_t dim = rows * cols;
    if (img.size() < 16 + n * dim)
        throw ParseError(images_path + ": truncated at offset " + std::to_string(img.size()) + " (expected " +
                         std::to_string(16 + n * dim) + " bytes)");
    if (lab.size() < 8 + n)
        throw ParseError(labels_path + ": truncated at offset " + std::to_string(lab.size()) + " (expected " +
                         std::to_string(8 + n) + " bytes)");
    std::vector<Vector> xs;
    std::vector<std::size_t> labels;
    for (std::size_t s = 0; s < n; ++s) {
        Vector x(dim);
        for (std::size_t q = 0; q < dim; ++q) x[q] = static_cast<double>(img[16 + s * dim + q]) / 255.0;
        xs.push_back(std::move(x));
        const std::size_t c = lab[8 + s];
        if (c >= classes)
            throw ParseError(labels_path + ": label " + std::to_string(c) + " at offset " + std::to_string(8 + s) +
                             " exceeds " + std::to_string(classes) + " classes");
        labels.push_back(c);
    }
    return make_classification(std::move(xs), std::move(labels), classes, images_path);
}

}  // namespace modecon
