#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "modecon/dataset.hpp"
#include "modecon/error.hpp"
#include "modecon/linalg.hpp"
#include "modecon/net.hpp"
#include "modecon/rng.hpp"

namespace modecon {

// Which units survive in each hidden layer, and the factor r_i applied to their outgoing weights.
// keep[i-1] and rescale[i-1] describe hidden layer i; keep sets are sorted and duplicate-free.
struct DropoutMask {
    std::vector<std::vector<std::size_t>> keep;
    std::vector<double> rescale;

    static DropoutMask full(const Network& net) {
        DropoutMask m;
        for (std::size_t i = 1; i < net.depth(); ++i) {
            std::vector<std::size_t> all(net.width(i));
            for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
            m.keep.push_back(std::move(all));
            m.rescale.push_back(1.0);
        }
        return m;
    }

    std::size_t hidden_layers() const { return keep.size(); }

    // Boolean membership for hidden layer i (1-based).
    std::vector<bool> kept(std::size_t layer, std::size_t width) const {
        std::vector<bool> k(width, false);
        for (std::size_t j : keep.at(layer - 1)) k[j] = true;
        return k;
    }

    void validate(const Network& net) const {
        if (keep.size() != net.depth() - 1 || rescale.size() != net.depth() - 1)
            throw DimensionError("mask has " + std::to_string(keep.size()) + " layers, network has " +
                                 std::to_string(net.depth() - 1) + " hidden layers");
        for (std::size_t i = 1; i < net.depth(); ++i) {
            const auto& k = keep[i - 1];
            for (std::size_t n = 0; n < k.size(); ++n) {
                if (k[n] >= net.width(i))
                    throw ValidationError("mask layer " + std::to_string(i) + ": unit " + std::to_string(k[n]) +
                                          " out of range (width " + std::to_string(net.width(i)) + ")");
                if (n > 0 && k[n] <= k[n - 1])
                    throw ValidationError("mask layer " + std::to_string(i) + ": keep set must be sorted and unique");
            }
            if (!(rescale[i - 1] > 0.0) || !std::isfinite(rescale[i - 1]))
                throw ValidationError("mask layer " + std::to_string(i) + ": rescale must be positive");
        }
    }

    bool operator==(const DropoutMask&) const = default;
};

// Drops every unit outside the keep sets of hidden layers first_layer..d-1: zeroes row j of A_i and
// column j of A_{i+1}, and multiplies the outgoing column of each kept unit by r_i.
// first_layer = 1 gives the fully masked network.
inline Network apply_mask_from(const Network& net, const DropoutMask& mask, std::size_t first_layer) {
    mask.validate(net);
    std::vector<Matrix> w = net.weights();
    for (std::size_t i = std::max<std::size_t>(first_layer, 1); i < net.depth(); ++i) {
        const auto kept = mask.kept(i, net.width(i));
        const double r = mask.rescale[i - 1];
        Matrix& in = w[i - 1];
        Matrix& out = w[i];
        for (std::size_t j = 0; j < kept.size(); ++j) {
            if (!kept[j])
                for (double& e : in.row(j)) e = 0.0;
            for (std::size_t row = 0; row < out.rows(); ++row) out(row, j) = kept[j] ? r * out(row, j) : 0.0;
        }
    }
    return Network(std::move(w));
}

inline Network apply_mask(const Network& net, const DropoutMask& mask) { return apply_mask_from(net, mask, 1); }

inline void check_open_probability(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("dropout probability must lie in (0,1), got " + std::to_string(p));
}

// Multiplies each column of A by 0 with probability p and by 1/(1-p) otherwise.
inline Matrix algorithm1_dropout(const Matrix& a, double p, std::uint64_t seed) {
    check_open_probability(p);
    Rng rng(seed);
    const double scale = 1.0 / (1.0 - p);
    Matrix out = a;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double delta = rng.uniform() < p ? 0.0 : scale;
        for (std::size_t r = 0; r < a.rows(); ++r) out(r, c) = delta * a(r, c);
    }
    return out;
}

// Column dropout applied to layers first..last (1-based, inclusive); A_1 is never touched when first >= 2.
// Layer i uses the seed derive_seed(seed, i).
inline Network algorithm1_network(const Network& net, double p, std::uint64_t seed, std::size_t first = 2,
                                  std::size_t last = std::numeric_limits<std::size_t>::max()) {
    std::vector<Matrix> w = net.weights();
    last = std::min(last, net.depth());
    for (std::size_t i = std::max<std::size_t>(first, 1); i <= last; ++i)
        w[i - 1] = algorithm1_dropout(net.weight(i), p, derive_seed(seed, i));
    return Network(std::move(w));
}

// floor(h (1 - p)); the small offset keeps products such as 10 * 0.7 from rounding down to 6.
inline std::size_t keep_count(std::size_t width, double p) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(width) * (1.0 - p) + 1e-9));
}

inline DropoutMask sample_mask(const Network& net, double p, std::uint64_t seed) {
    DropoutMask m;
    for (std::size_t i = 1; i < net.depth(); ++i) {
        const std::size_t k = keep_count(net.width(i), p);
        if (k == 0)
            throw ValidationError("dropout p=" + std::to_string(p) + " keeps no unit in hidden layer " +
                                  std::to_string(i) + " (width " + std::to_string(net.width(i)) + ")");
        Rng rng(derive_seed(seed, i));
        m.keep.push_back(rng.sample_without_replacement(net.width(i), k));
        m.rescale.push_back(1.0 / (1.0 - p));
    }
    return m;
}

struct StabilityGap {
    double base_loss = 0.0;
    double best_masked_loss = 0.0;
    double gap = 0.0;
    DropoutMask mask;
    std::size_t trials = 0;
    std::size_t best_trial = 0;
    std::optional<double> base_accuracy;
    std::optional<double> best_accuracy;
};

// Best of `trials` random masks that keep exactly floor(h_i (1 - p)) units per hidden layer with
// r_i = 1/(1 - p). Trial t uses derive_seed(seed, t); ties keep the lowest trial index.
inline StabilityGap dropout_stability_search(const Network& net, const LabeledDataset& data, LossKind kind, double p,
                                             std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw ValidationError("dropout search needs at least one trial");
    if (!(p >= 0.0 && p < 1.0)) throw ValidationError("dropout probability must lie in [0,1)");
    const LossResult base = loss(net, data, kind);
    StabilityGap g;
    g.base_loss = base.value;
    g.base_accuracy = base.accuracy;
    g.trials = trials;
    g.best_masked_loss = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        DropoutMask m = sample_mask(net, p, derive_seed(seed, t));
        const LossResult r = loss(apply_mask(net, m), data, kind);
        if (r.value < g.best_masked_loss) {
            g.best_masked_loss = r.value;
            g.best_accuracy = r.accuracy;
            g.mask = std::move(m);
            g.best_trial = t;
        }
    }
    g.gap = g.best_masked_loss - g.base_loss;
    return g;
}

// Losses of the suffix-masked networks: entry i-1 masks hidden layers i..d-1 only.
inline std::vector<double> suffix_mask_losses(const Network& net, const LabeledDataset& data, LossKind kind,
                                              const DropoutMask& mask) {
    std::vector<double> out;
    for (std::size_t i = 1; i < net.depth(); ++i) out.push_back(loss(apply_mask_from(net, mask, i), data, kind).value);
    return out;
}

// Gap over every suffix: max_i L(suffix-masked net) - L(net).
inline double suffix_gap(const Network& net, const LabeledDataset& data, LossKind kind, const DropoutMask& mask) {
    const auto l = suffix_mask_losses(net, data, kind, mask);
    return *std::max_element(l.begin(), l.end()) - loss(net, data, kind).value;
}

// One coordinate-descent sweep over hidden layers, choosing each r_i from an even grid on [lo, hi].
inline DropoutMask refine_rescale(const Network& net, const LabeledDataset& data, LossKind kind, DropoutMask mask,
                                  std::size_t grid = 15, double lo = 0.5, double hi = 4.0) {
    if (grid < 2) throw ValidationError("rescale grid needs at least two points");
    double best = loss(apply_mask(net, mask), data, kind).value;
    for (std::size_t i = 0; i < mask.rescale.size(); ++i) {
        for (std::size_t g = 0; g < grid; ++g) {
            DropoutMask trial = mask;
            trial.rescale[i] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
            const double l = loss(apply_mask(net, trial), data, kind).value;
            if (l < best) {
                best = l;
                mask = std::move(trial);
            }
        }
    }
    return mask;
}

}  // namespace modecon
