#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "modecon/dataset.hpp"
#include "modecon/dropout.hpp"
#include "modecon/error.hpp"
#include "modecon/linalg.hpp"
#include "modecon/net.hpp"
#include "modecon/rng.hpp"

namespace modecon {

// Per-sample values of one quantity. Samples where the ratio is undefined or infinite are
// counted in `censored` and left out of `values`.
struct Distribution {
    std::vector<double> values;
    std::size_t censored = 0;

    bool empty() const { return values.empty(); }
    double min() const {
        return values.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::min_element(values.begin(), values.end());
    }
    double max() const {
        return values.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(values.begin(), values.end());
    }
    double median() const {
        if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
        std::vector<double> v = values;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    }
};

namespace detail {

inline std::vector<ForwardTrace> traces(const Network& net, const LabeledDataset& data) {
    if (data.empty()) throw ValidationError("stability: dataset is empty");
    if (data.input_dim() != net.input_dim()) throw DimensionError("stability: dataset input dimension differs");
    std::vector<ForwardTrace> out;
    out.reserve(data.size());
    for (const auto& x : data.inputs) out.push_back(forward(net, x));
    return out;
}

inline void require_some(const Distribution& d, const std::string& what) {
    if (d.values.empty()) throw NumericError(what + ": every sample is degenerate");
}

}  // namespace detail

// ||A_i φ(x^{i-1})|| / (||A_i||_F ||φ(x^{i-1})||). Layer 1 uses the raw input x^0.
inline Distribution layer_cushion(const Network& net, const LabeledDataset& data, std::size_t i) {
    if (i < 1 || i > net.depth()) throw ValidationError("layer_cushion: layer out of range");
    const double fro = frobenius_norm(net.weight(i));
    Distribution d;
    for (const auto& t : detail::traces(net, data)) {
        const Vector v = i == 1 ? t.input : relu(t.at(i - 1));
        const double den = fro * norm(v);
        if (den == 0.0) {
            ++d.censored;
            continue;
        }
        d.values.push_back(norm(t.at(i)) / den);
    }
    detail::require_some(d, "layer_cushion");
    return d;
}

// ||J^{i,j} x^i|| / (||J^{i,j}|| ||x^i||) with the spectral norm; exactly 1 when i = j.
inline Distribution interlayer_cushion(const Network& net, const LabeledDataset& data, std::size_t i, std::size_t j,
                                       double tol = 1e-10) {
    check_layer_pair(net, i, j);
    Distribution d;
    for (const auto& t : detail::traces(net, data)) {
        const Vector& xi = t.at(i);
        const double nx = norm(xi);
        if (nx == 0.0) {
            ++d.censored;
            continue;
        }
        if (i == j) {
            d.values.push_back(1.0);
            continue;
        }
        const Matrix jac = interlayer_jacobian(net, i, j, xi);
        const double sn = spectral_norm(jac, tol).value;
        if (sn == 0.0) {
            ++d.censored;
            continue;
        }
        d.values.push_back(norm(matvec(jac, xi)) / (sn * nx));
    }
    detail::require_some(d, "interlayer_cushion");
    return d;
}

// min over i <= j <= d of the interlayer cushion minima.
inline double minimal_interlayer_cushion(const Network& net, const LabeledDataset& data, std::size_t i,
                                         double tol = 1e-10) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t j = i; j <= net.depth(); ++j) m = std::min(m, interlayer_cushion(net, data, i, j, tol).min());
    return m;
}

// max over samples and hidden layers of ||x^i|| / ||φ(x^i)||. A layer whose preactivation is nonzero but
// entirely non-positive gives an infinite ratio and is counted as censored; so is x^i = 0.
inline Distribution activation_contraction(const Network& net, const LabeledDataset& data) {
    Distribution d;
    for (const auto& t : detail::traces(net, data))
        for (std::size_t i = 1; i < net.depth(); ++i) {
            const double num = norm(t.at(i));
            const double den = norm(relu(t.at(i)));
            if (den == 0.0) {
                ++d.censored;
                continue;
            }
            d.values.push_back(num / den);
        }
    detail::require_some(d, "activation_contraction");
    return d;
}

struct SmoothnessResult {
    std::vector<Distribution> per_layer;          // index i-1 for layer i; layer 1 stays empty
    std::vector<double> realization_min;          // binding value of each dropout realization
    double rho_min = std::numeric_limits<double>::infinity();
    double rho_median_realization = std::numeric_limits<double>::infinity();
    std::size_t linear = 0;                       // exact linearity: ρ̂ = +inf
    std::size_t unperturbed = 0;                  // x̂ = x^i, both sides zero
    double infinity_constant = 0.0;               // max of sqrt(h_i) ||φ(x̂)||_inf / ||φ(x̂)||, 1 <= i <= d-1
    std::size_t infinity_censored = 0;
};

// Interlayer smoothness under column dropout of A_2..A_i. For realization r, layer k of the dropped
// network uses derive_seed(derive_seed(seed, r), k). Grid points are t = k/(t_grid-1); parameters are
// θ t + θ^i (1 - t), so t = 1 reproduces x^i and is always in the unperturbed count.
inline SmoothnessResult interlayer_smoothness(const Network& net, const LabeledDataset& data, double p,
                                              std::size_t mask_samples, std::size_t t_grid, std::uint64_t seed) {
    check_open_probability(p);
    if (mask_samples < 1) throw ValidationError("interlayer_smoothness: need at least one dropout realization");
    if (t_grid < 2) throw ValidationError("interlayer_smoothness: t grid needs at least two points");
    const std::size_t d = net.depth();
    const auto tr = detail::traces(net, data);

    // Jacobians of the original network, J[s][i][j].
    std::vector<std::vector<std::vector<Matrix>>> jac(tr.size());
    for (std::size_t s = 0; s < tr.size(); ++s) {
        jac[s].resize(d + 1);
        for (std::size_t i = 2; i <= d; ++i) {
            jac[s][i].resize(d + 1);
            for (std::size_t j = i; j <= d; ++j) jac[s][i][j] = interlayer_jacobian(net, i, j, tr[s].at(i));
        }
    }

    SmoothnessResult out;
    out.per_layer.resize(d);
    for (std::size_t r = 0; r < mask_samples; ++r) {
        const std::uint64_t rs = derive_seed(seed, r);
        std::vector<Matrix> dropped(d + 1);
        for (std::size_t k = 2; k <= d; ++k) dropped[k] = algorithm1_dropout(net.weight(k), p, derive_seed(rs, k));
        // θ^m: A_2..A_m dropped.
        auto theta = [&](std::size_t m) {
            std::vector<Matrix> w = net.weights();
            for (std::size_t k = 2; k <= m; ++k) w[k - 1] = dropped[k];
            return Network(std::move(w));
        };
        double rmin = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < t_grid; ++g) {
            const double t = static_cast<double>(g) / static_cast<double>(t_grid - 1);
            for (std::size_t i = 1; i <= d; ++i) {
                const Network blended_i = lerp(theta(i), net, t);
                const Network blended_prev = i >= 2 ? lerp(theta(i - 1), net, t) : blended_i;
                for (std::size_t s = 0; s < tr.size(); ++s) {
                    const Vector& xi = tr[s].at(i);
                    const Vector xhat_i = forward(blended_i, tr[s].input).at(i);
                    if (i < d) {
                        const Vector a = relu(xhat_i);
                        const double n2 = norm(a);
                        if (n2 == 0.0) ++out.infinity_censored;
                        else
                            out.infinity_constant = std::max(
                                out.infinity_constant, std::sqrt(static_cast<double>(net.width(i))) * max_abs(a) / n2);
                    }
                    if (i < 2) continue;
                    const double nxi = norm(xi);
                    const Vector xhat_prev = forward(blended_prev, tr[s].input).at(i);
                    for (const Vector* xh : {&xhat_i, &xhat_prev})
                        for (std::size_t j = i; j <= d; ++j) {
                            const double pert = [&] {
                                double acc = 0.0;
                                for (std::size_t k = 0; k < xi.size(); ++k) acc += ((*xh)[k] - xi[k]) * ((*xh)[k] - xi[k]);
                                return std::sqrt(acc);
                            }();
                            if (pert == 0.0 || nxi == 0.0) {
                                ++out.unperturbed;
                                continue;
                            }
                            const Vector m = partial_forward(net, i, j, *xh);
                            const Vector lin = matvec(jac[s][i][j], *xh);
                            double err = 0.0;
                            for (std::size_t k = 0; k < m.size(); ++k) err += (m[k] - lin[k]) * (m[k] - lin[k]);
                            err = std::sqrt(err);
                            if (err == 0.0) {
                                ++out.linear;
                                ++out.per_layer[i - 1].censored;
                                continue;
                            }
                            const double rho = pert * norm(tr[s].at(j)) / (err * nxi);
                            out.per_layer[i - 1].values.push_back(rho);
                            rmin = std::min(rmin, rho);
                        }
                }
            }
        }
        out.realization_min.push_back(rmin);
        out.rho_min = std::min(out.rho_min, rmin);
    }
    std::vector<double> sorted = out.realization_min;
    std::sort(sorted.begin(), sorted.end());
    out.rho_median_realization = sorted[sorted.size() / 2];
    return out;
}

struct StabilityOptions {
    double p = 0.5;
    std::size_t mask_samples = 8;
    std::size_t t_grid = 11;
    std::uint64_t seed = 0;
    std::size_t max_samples = 4096;  // probe set size cap
    std::size_t smoothness_samples = 256;  // samples used for the (costlier) smoothness estimate
    std::optional<double> beta;      // defaults: sqrt(2) for softmax-CE, 2 max||y - ŷ|| for squared loss
    double spectral_tol = 1e-10;
};

struct SideCondition {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct StabilityReport {
    std::size_t depth = 0;
    std::size_t h_min = 0;
    std::size_t samples = 0;
    double max_output_norm = 0.0;

    std::vector<double> mu;        // layer cushion minima, index i-1 for layer i
    std::vector<double> mu_arrow;  // minimal interlayer cushions, index i-1
    double c = 1.0;                // activation contraction
    std::optional<double> rho;     // binding interlayer smoothness
    std::optional<double> infinity_constant;

    std::vector<Distribution> layer_cushion_dist;                  // index i-1
    std::vector<std::vector<Distribution>> interlayer_cushion_dist;  // [i-1][j-i]
    std::vector<Distribution> minimal_interlayer_dist;             // per-sample min over j, index i-1
    std::vector<Distribution> contraction_dist;                    // hidden layers, index i-1
    std::optional<SmoothnessResult> smoothness;

    double beta = 1.0;
    bool beta_is_data_bound = false;  // squared loss: beta is 2 max||y - ŷ|| on this data
    double epsilon = 0.0;
    std::vector<SideCondition> conditions;
};

struct NoiseStability {
    double epsilon = 0.0;
    std::vector<SideCondition> conditions;
};

// ε = β c d^{3/2} max||f(x)|| / (sqrt(h_min) min_{2<=i<=d} μ_i μ_i→), plus the side conditions.
// Thresholds for the two asymptotic conditions are heuristics: h_min >= 8, and the measured
// sqrt(h) ||φ||_inf / ||φ|| constant at most sqrt(h_min) / 2.
inline NoiseStability epsilon_noise_stable(const StabilityReport& r, double beta) {
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    if (r.depth < 2 || r.mu.size() < r.depth || r.mu_arrow.size() < r.depth)
        throw ValidationError("stability report is missing per-layer cushions");
    if (r.h_min == 0) throw ValidationError("h_min must be positive");
    double denom = std::numeric_limits<double>::infinity();
    for (std::size_t i = 2; i <= r.depth; ++i) {
        if (!(r.mu[i - 1] > 0.0) || !(r.mu_arrow[i - 1] > 0.0))
            throw ValidationError("cushions must be positive (layer " + std::to_string(i) + ")");
        denom = std::min(denom, r.mu[i - 1] * r.mu_arrow[i - 1]);
    }
    const double d = static_cast<double>(r.depth);
    NoiseStability out;
    out.epsilon = beta * r.c * d * std::sqrt(d) * r.max_output_norm / (std::sqrt(static_cast<double>(r.h_min)) * denom);
    out.conditions.push_back({"h_min", static_cast<double>(r.h_min), 8.0, r.h_min >= 8});
    if (r.rho) out.conditions.push_back({"rho >= 3d", *r.rho, 3.0 * d, *r.rho >= 3.0 * d});
    if (r.infinity_constant) {
        const double thr = std::sqrt(static_cast<double>(r.h_min)) / 2.0;
        out.conditions.push_back({"infinity_norm_ratio", *r.infinity_constant, thr, *r.infinity_constant <= thr});
    }
    return out;
}

// Every quantity on the first max_samples samples; smoothness on the first smoothness_samples.
inline StabilityReport measure_stability(const Network& net, const LabeledDataset& full, LossKind kind,
                                         const StabilityOptions& opt = {}) {
    const LabeledDataset data = full.head(opt.max_samples);
    check_compatible(net, data, kind);
    const std::size_t d = net.depth();
    StabilityReport rep;
    rep.depth = d;
    rep.h_min = net.min_hidden_width();
    rep.samples = data.size();

    double max_err = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const Vector f = output(net, data.inputs[s]);
        rep.max_output_norm = std::max(rep.max_output_norm, norm(f));
        double e = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) e += (f[k] - data.targets[s][k]) * (f[k] - data.targets[s][k]);
        max_err = std::max(max_err, std::sqrt(e));
    }

    for (std::size_t i = 1; i <= d; ++i) {
        rep.layer_cushion_dist.push_back(layer_cushion(net, data, i));
        rep.mu.push_back(rep.layer_cushion_dist.back().min());
    }

    const auto tr = detail::traces(net, data);
    rep.interlayer_cushion_dist.resize(d);
    for (std::size_t i = 1; i <= d; ++i) {
        Distribution per_sample_min;
        std::vector<Distribution> row(d - i + 1);
        for (std::size_t s = 0; s < tr.size(); ++s) {
            const Vector& xi = tr[s].at(i);
            const double nx = norm(xi);
            double m = std::numeric_limits<double>::infinity();
            bool any = false;
            for (std::size_t j = i; j <= d; ++j) {
                double v;
                if (nx == 0.0) {
                    ++row[j - i].censored;
                    continue;
                }
                if (i == j) {
                    v = 1.0;
                } else {
                    const Matrix jac = interlayer_jacobian(net, i, j, xi);
                    const double sn = spectral_norm(jac, opt.spectral_tol).value;
                    if (sn == 0.0) {
                        ++row[j - i].censored;
                        continue;
                    }
                    v = norm(matvec(jac, xi)) / (sn * nx);
                }
                row[j - i].values.push_back(v);
                m = std::min(m, v);
                any = true;
            }
            if (any) per_sample_min.values.push_back(m);
            else ++per_sample_min.censored;
        }
        double mu_arrow = std::numeric_limits<double>::infinity();
        for (const auto& dist : row) {
            detail::require_some(dist, "interlayer_cushion");
            mu_arrow = std::min(mu_arrow, dist.min());
        }
        rep.interlayer_cushion_dist[i - 1] = std::move(row);
        rep.minimal_interlayer_dist.push_back(std::move(per_sample_min));
        rep.mu_arrow.push_back(mu_arrow);
    }

    rep.c = 1.0;
    for (std::size_t i = 1; i < d; ++i) {
        Distribution dist;
        for (const auto& t : tr) {
            const double den = norm(relu(t.at(i)));
            if (den == 0.0) {
                ++dist.censored;
                continue;
            }
            dist.values.push_back(norm(t.at(i)) / den);
        }
        if (!dist.empty()) rep.c = std::max(rep.c, dist.max());
        rep.contraction_dist.push_back(std::move(dist));
    }

    if (opt.mask_samples > 0 && opt.smoothness_samples > 0) {
        rep.smoothness = interlayer_smoothness(net, data.head(opt.smoothness_samples), opt.p, opt.mask_samples,
                                               opt.t_grid, opt.seed);
        if (std::isfinite(rep.smoothness->rho_min)) rep.rho = rep.smoothness->rho_min;
        rep.infinity_constant = rep.smoothness->infinity_constant;
    }

    if (opt.beta) {
        rep.beta = *opt.beta;
    } else if (kind == LossKind::softmax_cross_entropy) {
        rep.beta = std::sqrt(2.0);
    } else {
        rep.beta = std::max(2.0 * max_err, std::numeric_limits<double>::min());
        rep.beta_is_data_bound = true;
    }
    const NoiseStability ns = epsilon_noise_stable(rep, rep.beta);
    rep.epsilon = ns.epsilon;
    rep.conditions = ns.conditions;
    return rep;
}

}  // namespace modecon
