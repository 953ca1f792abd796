#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "modecon/dataset.hpp"
#include "modecon/error.hpp"
#include "modecon/linalg.hpp"

namespace modecon {

inline Vector relu(Vector v) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
    return v;
}

// Bias-free ReLU network: x^1 = A_1 x^0 and x^i = A_i φ(x^{i-1}) for 1 < i <= d.
// Layer numbers in this API are 1-based, so weight(i) is A_i and width(i) is h_i;
// width(0) is the input dimension and width(d) the output dimension.
class Network {
public:
    Network() = default;

    explicit Network(std::vector<Matrix> weights) : weights_(std::move(weights)) {
        if (weights_.size() < 2) throw ValidationError("network depth must be at least 2");
        for (std::size_t k = 1; k < weights_.size(); ++k)
            if (weights_[k].cols() != weights_[k - 1].rows())
                throw DimensionError("layer " + std::to_string(k + 1) + " expects " +
                                     std::to_string(weights_[k].cols()) + " inputs but layer " +
                                     std::to_string(k) + " has " + std::to_string(weights_[k - 1].rows()) +
                                     " units");
        for (const auto& w : weights_)
            if (w.rows() == 0 || w.cols() == 0) throw ValidationError("network layers must be non-empty");
    }

    std::size_t depth() const { return weights_.size(); }

    const Matrix& weight(std::size_t layer) const {
        check_layer(layer);
        return weights_[layer - 1];
    }

    std::size_t width(std::size_t layer) const {
        if (layer > depth()) throw ValidationError("width: layer out of range");
        return layer == 0 ? weights_.front().cols() : weights_[layer - 1].rows();
    }

    std::size_t input_dim() const { return width(0); }
    std::size_t output_dim() const { return width(depth()); }

    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i <= depth(); ++i) out.push_back(width(i));
        return out;
    }

    std::size_t min_hidden_width() const {
        std::size_t m = width(1);
        for (std::size_t i = 2; i < depth(); ++i) m = std::min(m, width(i));
        return m;
    }

    std::size_t max_hidden_width() const {
        std::size_t m = width(1);
        for (std::size_t i = 2; i < depth(); ++i) m = std::max(m, width(i));
        return m;
    }

    const std::vector<Matrix>& weights() const { return weights_; }

    bool same_shape(const Network& o) const { return dims() == o.dims(); }

    bool operator==(const Network&) const = default;

private:
    void check_layer(std::size_t layer) const {
        if (layer < 1 || layer > depth())
            throw ValidationError("layer " + std::to_string(layer) + " outside 1.." + std::to_string(depth()));
    }

    std::vector<Matrix> weights_;
};

// (1 - t) a + t b layer by layer.
inline Network lerp(const Network& a, const Network& b, double t) {
    if (!a.same_shape(b)) throw DimensionError("lerp: networks have different shapes");
    std::vector<Matrix> w;
    w.reserve(a.depth());
    for (std::size_t i = 1; i <= a.depth(); ++i) w.push_back(lerp(a.weight(i), b.weight(i), t));
    return Network(std::move(w));
}

struct ForwardTrace {
    Vector input;                      // x^0
    std::vector<Vector> preactivation;  // x^1 .. x^d

    const Vector& at(std::size_t layer) const { return layer == 0 ? input : preactivation.at(layer - 1); }
    const Vector& output() const { return preactivation.back(); }
};

inline ForwardTrace forward(const Network& net, const Vector& x) {
    if (x.size() != net.input_dim())
        throw DimensionError("forward: input has " + std::to_string(x.size()) + " entries, network expects " +
                             std::to_string(net.input_dim()));
    ForwardTrace t;
    t.input = x;
    t.preactivation.reserve(net.depth());
    t.preactivation.push_back(matvec(net.weight(1), x));
    for (std::size_t i = 2; i <= net.depth(); ++i)
        t.preactivation.push_back(matvec(net.weight(i), relu(t.preactivation.back())));
    return t;
}

inline Vector output(const Network& net, const Vector& x) {
    if (x.size() != net.input_dim()) throw DimensionError("output: input dimension mismatch");
    Vector v = matvec(net.weight(1), x);
    for (std::size_t i = 2; i <= net.depth(); ++i) v = matvec(net.weight(i), relu(std::move(v)));
    return v;
}

inline void check_layer_pair(const Network& net, std::size_t i, std::size_t j) {
    if (i < 1 || i > j || j > net.depth())
        throw ValidationError("layer pair (" + std::to_string(i) + "," + std::to_string(j) +
                              ") must satisfy 1 <= i <= j <= " + std::to_string(net.depth()));
}

// M^{i,j}: maps x^i to x^j.
inline Vector partial_forward(const Network& net, std::size_t i, std::size_t j, const Vector& xi) {
    check_layer_pair(net, i, j);
    if (xi.size() != net.width(i)) throw DimensionError("partial_forward: x^i has the wrong dimension");
    Vector v = xi;
    for (std::size_t k = i + 1; k <= j; ++k) v = matvec(net.weight(k), relu(std::move(v)));
    return v;
}

// J^{i,j} = A_j D_{j-1} ... A_{i+1} D_i with D_k = diag(1[x^k > 0]) along the partial forward from x^i.
inline Matrix interlayer_jacobian(const Network& net, std::size_t i, std::size_t j, const Vector& xi) {
    check_layer_pair(net, i, j);
    if (xi.size() != net.width(i)) throw DimensionError("interlayer_jacobian: x^i has the wrong dimension");
    Matrix jac = Matrix::identity(net.width(i));
    Vector v = xi;
    for (std::size_t k = i + 1; k <= j; ++k) {
        // Mask the rows of the running product by the activation pattern of layer k-1.
        for (std::size_t r = 0; r < v.size(); ++r)
            if (!(v[r] > 0.0))
                for (double& e : jac.row(r)) e = 0.0;
        jac = matmul(net.weight(k), jac);
        v = matvec(net.weight(k), relu(std::move(v)));
    }
    return jac;
}

enum class LossKind { squared, softmax_cross_entropy };

inline std::string to_string(LossKind k) { return k == LossKind::squared ? "squared" : "softmax_ce"; }

inline LossKind loss_kind_from_string(const std::string& s) {
    if (s == "squared" || s == "mse") return LossKind::squared;
    if (s == "softmax_ce" || s == "ce" || s == "cross_entropy") return LossKind::softmax_cross_entropy;
    throw ValidationError("unknown loss kind '" + s + "' (expected squared or softmax_ce)");
}

inline double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

// Per-sample loss. Squared loss is ||y - ŷ||² without a ½ factor.
inline double sample_loss(LossKind kind, const Vector& y, std::size_t label, const Vector& yhat) {
    if (kind == LossKind::squared) {
        double s = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) s += (y[k] - yhat[k]) * (y[k] - yhat[k]);
        return s;
    }
    return log_sum_exp(yhat) - yhat[label];
}

// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[best]) best = k;
    return best;
}

struct LossResult {
    double value = 0.0;
    std::optional<double> accuracy;  // present when the dataset carries class labels
};

inline void check_compatible(const Network& net, const LabeledDataset& data, LossKind kind) {
    if (data.empty()) throw ValidationError("loss: dataset is empty");
    if (data.input_dim() != net.input_dim())
        throw DimensionError("dataset inputs have dimension " + std::to_string(data.input_dim()) +
                             " but the network expects " + std::to_string(net.input_dim()));
    if (data.target_dim() != net.output_dim())
        throw DimensionError("dataset targets have dimension " + std::to_string(data.target_dim()) +
                             " but the network outputs " + std::to_string(net.output_dim()));
    if (kind == LossKind::softmax_cross_entropy && !data.has_labels())
        throw ValidationError("softmax cross-entropy needs class labels");
}

// Mean loss over the dataset, summed in sample order.
inline LossResult loss(const Network& net, const LabeledDataset& data, LossKind kind) {
    check_compatible(net, data, kind);
    double total = 0.0;
    std::size_t correct = 0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const Vector f = output(net, data.inputs[s]);
        const std::size_t label = data.has_labels() ? data.labels[s] : 0;
        total += sample_loss(kind, data.targets[s], label, f);
        if (data.has_labels() && argmax(f) == label) ++correct;
    }
    LossResult r;
    r.value = total / static_cast<double>(data.size());
    if (data.has_labels()) r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return r;
}

}  // namespace modecon
