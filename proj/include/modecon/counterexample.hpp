#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "modecon/dataset.hpp"
#include "modecon/error.hpp"
#include "modecon/linalg.hpp"
#include "modecon/net.hpp"
#include "modecon/paths.hpp"
#include "modecon/rng.hpp"

namespace modecon {

// A dataset on which two-layer students of hidden width h have disconnected global minima.
// Rows are split into blocks at k < l < m < n.
struct CounterexampleSpec {
    std::size_t h = 3;
    std::size_t k = 4;
    std::size_t l = 8;
    std::size_t m = 11;
    std::size_t n = 15;

    void validate() const {
        if (h < 2) throw ValidationError("counterexample: need h >= 2");
        if (!(k < l && l < m && m < n)) throw ValidationError("counterexample: need k < l < m < n");
        if (!(k > h)) throw ValidationError("counterexample: need k > h");
        if (!(l - k > h)) throw ValidationError("counterexample: need l - k > h");
        if (!(m - l > 2)) throw ValidationError("counterexample: need m - l > 2");
        if (!(n - m > h)) throw ValidationError("counterexample: need n - m > h");
    }

    std::size_t features() const { return h + 2; }
};

// Entry x_{i,j} with 1-based i and j. Column j >= 3 belongs to residue j - 2 mod h, so row 1 reads
// (1, 0, 1, -1, ..., -1).
inline double counterexample_entry(const CounterexampleSpec& s, std::size_t i, std::size_t j) {
    const auto same = [](std::size_t a, std::size_t b, std::size_t mod) { return a % mod == b % mod; };
    if (i <= s.l) {
        if (j == 1) return static_cast<double>(i);
        if (j == 2) return static_cast<double>(i - 1);
        if (same(i, j - 2, s.h)) return 1.0;
        return i <= s.k ? -1.0 : 0.0;
    }
    if (i <= s.m) {
        if (j <= 2) return same(i, j, 2) ? -1.0 : 0.0;
        return 0.0;
    }
    if (j <= 2) return 0.0;
    return same(i, j - 2, s.h) ? -1.0 : 0.0;
}

inline LabeledDataset build_counterexample_dataset(const CounterexampleSpec& s) {
    s.validate();
    std::vector<Vector> xs, ys;
    for (std::size_t i = 1; i <= s.n; ++i) {
        Vector x(s.features());
        for (std::size_t j = 1; j <= s.features(); ++j) x[j - 1] = counterexample_entry(s, i, j);
        xs.push_back(std::move(x));
        ys.push_back({i <= s.l ? 1.0 : 0.0});
    }
    return make_regression(std::move(xs), std::move(ys), "counterexample");
}

// Two zero-loss students f(x) = w^T φ(A x): netA reads f_1 and f_2 with w = (1, -1, 0, ...),
// netB reads f_3 .. f_{h+2} with all output weights 1.
inline std::pair<Network, Network> build_counterexample_minima(const CounterexampleSpec& s) {
    s.validate();
    Matrix a1(s.h, s.features()), b1(s.h, s.features());
    Matrix a2(1, s.h), b2(1, s.h);
    a1(0, 0) = 1.0;
    a1(1, 1) = 1.0;
    a2(0, 0) = 1.0;
    a2(0, 1) = -1.0;
    for (std::size_t u = 0; u < s.h; ++u) {
        b1(u, u + 2) = 1.0;
        b2(0, u) = 1.0;
    }
    return {Network({a1, a2}), Network({b1, b2})};
}

// Loss profile along the straight line between the two minima.
inline PathProfile probe_counterexample_barrier(const CounterexampleSpec& s, std::size_t grid) {
    const LabeledDataset data = build_counterexample_dataset(s);
    const auto [a, b] = build_counterexample_minima(s);
    return eval_path(linear_path(a, b), data, LossKind::squared, grid);
}

// Same, along a caller-supplied path. Its endpoints must be the two minima, in either order.
inline PathProfile probe_counterexample_barrier(const CounterexampleSpec& s, const PiecewisePath& path,
                                                std::size_t grid) {
    const LabeledDataset data = build_counterexample_dataset(s);
    const auto [a, b] = build_counterexample_minima(s);
    if (!path.front().same_shape(a)) throw DimensionError("counterexample path has the wrong architecture");
    const bool forward = path.front() == a && path.back() == b;
    const bool backward = path.front() == b && path.back() == a;
    if (!forward && !backward) throw ValidationError("counterexample path must join the two constructed minima");
    return eval_path(path, data, LossKind::squared, grid);
}

struct PositiveProbeOptions {
    std::size_t restarts = 10000;
    std::size_t iterations = 300;
    double lr = 0.02;
    double init_scale = 1.0;
    std::uint64_t seed = 0;
};

// Lowest squared loss found for students with h-1 hidden units and nonnegative output weights.
// Empirical evidence only: a positive floor does not prove that no such network fits the data.
struct PositiveProbeResult {
    double floor = std::numeric_limits<double>::infinity();
    std::size_t best_restart = 0;
    std::size_t restarts = 0;
    Network best;
};

// Full-batch projected gradient descent from random starts; restart r uses derive_seed(seed, r).
// Output weights are clamped at zero after every step; diverged restarts are skipped.
inline PositiveProbeResult probe_positive_weight_floor(const CounterexampleSpec& s,
                                                       const PositiveProbeOptions& opt = {}) {
    if (opt.restarts < 1) throw ValidationError("probe needs at least one restart");
    const LabeledDataset data = build_counterexample_dataset(s);
    const std::size_t units = s.h - 1, in = s.features();
    const double count = static_cast<double>(data.size());
    PositiveProbeResult res;
    res.restarts = opt.restarts;
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        Rng rng(derive_seed(opt.seed, r));
        Matrix a(units, in);
        Vector w(units);
        for (double& v : a.data()) v = opt.init_scale * rng.normal();
        for (double& v : w) v = opt.init_scale * rng.uniform();
        double value = 0.0;
        for (std::size_t it = 0; it <= opt.iterations; ++it) {
            Matrix ga(units, in);
            Vector gw(units, 0.0);
            value = 0.0;
            for (std::size_t sidx = 0; sidx < data.size(); ++sidx) {
                const Vector& x = data.inputs[sidx];
                const Vector z = matvec(a, x);
                double f = 0.0;
                for (std::size_t u = 0; u < units; ++u) f += w[u] * std::max(z[u], 0.0);
                const double e = f - data.targets[sidx][0];
                value += e * e;
                for (std::size_t u = 0; u < units; ++u) {
                    if (!(z[u] > 0.0)) continue;
                    gw[u] += 2.0 * e * z[u];
                    for (std::size_t c = 0; c < in; ++c) ga(u, c) += 2.0 * e * w[u] * x[c];
                }
            }
            value /= count;
            if (!std::isfinite(value) || it == opt.iterations) break;
            for (std::size_t u = 0; u < units; ++u) w[u] = std::max(0.0, w[u] - opt.lr * gw[u] / count);
            for (std::size_t q = 0; q < a.size(); ++q) a.data()[q] -= opt.lr * ga.data()[q] / count;
        }
        if (std::isfinite(value) && value < res.floor) {
            res.floor = value;
            res.best_restart = r;
            Matrix w2(1, units, w);
            res.best = Network({a, w2});
        }
    }
    return res;
}

}  // namespace modecon
