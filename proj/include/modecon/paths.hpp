#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modecon/dataset.hpp"
#include "modecon/dropout.hpp"
#include "modecon/error.hpp"
#include "modecon/linalg.hpp"
#include "modecon/net.hpp"
#include "modecon/rng.hpp"

namespace modecon {

// A path construction could not be completed (for example no dropout sample freed enough units).
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// type_a: only A_d moves. type_b: only rows whose outgoing columns are zero move.
// interp: plain interpolation (direct dropout). permute: part of a unit permutation.
enum class SegmentKind { type_a, type_b, interp, permute };

inline std::string to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::type_a: return "type_a";
        case SegmentKind::type_b: return "type_b";
        case SegmentKind::interp: return "interp";
        case SegmentKind::permute: return "permute";
    }
    return "unknown";
}

struct PiecewisePath {
    std::vector<Network> points;
    std::vector<SegmentKind> labels;

    static PiecewisePath starting_at(Network start) {
        PiecewisePath p;
        p.points.push_back(std::move(start));
        return p;
    }

    std::size_t segments() const { return labels.size(); }
    const Network& front() const { return points.front(); }
    const Network& back() const { return points.back(); }

    void push(Network next, SegmentKind kind) {
        if (!next.same_shape(points.back())) throw DimensionError("path points must share one architecture");
        points.push_back(std::move(next));
        labels.push_back(kind);
    }

    // Point at global parameter t in [0,1]; each segment spans an equal share of the interval.
    Network at(double t) const {
        if (segments() == 0) return points.front();
        t = std::clamp(t, 0.0, 1.0);
        const double u = t * static_cast<double>(segments());
        std::size_t k = std::min(static_cast<std::size_t>(u), segments() - 1);
        return lerp(points[k], points[k + 1], u - static_cast<double>(k));
    }

    std::size_t count(SegmentKind kind) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kind)); }
};

inline PiecewisePath concatenate(const PiecewisePath& a, const PiecewisePath& b) {
    if (!(a.back() == b.front())) throw std::logic_error("concatenate: paths do not share an endpoint");
    PiecewisePath out = a;
    for (std::size_t k = 0; k < b.segments(); ++k) out.push(b.points[k + 1], b.labels[k]);
    return out;
}

inline PiecewisePath reversed(const PiecewisePath& p) {
    PiecewisePath out;
    out.points.assign(p.points.rbegin(), p.points.rend());
    out.labels.assign(p.labels.rbegin(), p.labels.rend());
    return out;
}

struct PathProfile {
    std::vector<double> ts;
    std::vector<double> losses;
    std::vector<std::optional<double>> accuracies;
    std::vector<std::size_t> segment;  // segment index of each grid point (last point belongs to the last segment)
    double max_loss = 0.0;
    double barrier = 0.0;

    double start_loss() const { return losses.front(); }
    double end_loss() const { return losses.back(); }
};

// Loss on a uniform grid of samples_per_segment points per segment (breakpoints included) plus t = 1.
inline PathProfile eval_path(const PiecewisePath& path, const LabeledDataset& data, LossKind kind,
                             std::size_t samples_per_segment) {
    if (samples_per_segment < 1) throw ValidationError("samples_per_segment must be at least 1");
    check_compatible(path.front(), data, kind);
    PathProfile prof;
    auto record = [&](double t, std::size_t seg, const Network& net) {
        const LossResult r = loss(net, data, kind);
        prof.ts.push_back(t);
        prof.losses.push_back(r.value);
        prof.accuracies.push_back(r.accuracy);
        prof.segment.push_back(seg);
    };
    const std::size_t s = path.segments();
    if (s == 0) {
        record(0.0, 0, path.front());
        record(1.0, 0, path.front());
    } else {
        const double n = static_cast<double>(samples_per_segment);
        for (std::size_t k = 0; k < s; ++k)
            for (std::size_t j = 0; j < samples_per_segment; ++j) {
                const double tau = static_cast<double>(j) / n;
                const Network net = j == 0 ? path.points[k] : lerp(path.points[k], path.points[k + 1], tau);
                record((static_cast<double>(k) + tau) / static_cast<double>(s), k, net);
            }
        record(1.0, s - 1, path.back());
    }
    prof.max_loss = *std::max_element(prof.losses.begin(), prof.losses.end());
    prof.barrier = prof.max_loss - std::max(prof.start_loss(), prof.end_loss());
    return prof;
}

// live[i-1][j] is true when unit j of hidden layer i can influence the output: either its column in
// A_d is nonzero (i = d-1), or some live unit of layer i+1 reads it with a nonzero weight.
// Every other unit is free: its row may be changed without changing f.
inline std::vector<std::vector<bool>> live_units(const Network& net) {
    const std::size_t d = net.depth();
    std::vector<std::vector<bool>> live(d - 1);
    for (std::size_t i = d - 1; i >= 1; --i) {
        const Matrix& next = net.weight(i + 1);
        live[i - 1].assign(net.width(i), false);
        for (std::size_t r = 0; r < next.rows(); ++r) {
            if (i + 1 < d && !live[i][r]) continue;
            for (std::size_t j = 0; j < next.cols(); ++j)
                if (next(r, j) != 0.0) live[i - 1][j] = true;
        }
    }
    return live;
}

inline std::vector<std::size_t> indices_where(const std::vector<bool>& v, bool value) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] == value) out.push_back(j);
    return out;
}

// Fully zeroed units: row j of A_i and column j of A_{i+1} both zero.
inline std::vector<std::vector<bool>> zeroed_units(const Network& net) {
    std::vector<std::vector<bool>> z(net.depth() - 1);
    for (std::size_t i = 1; i < net.depth(); ++i) {
        z[i - 1].assign(net.width(i), false);
        for (std::size_t j = 0; j < net.width(i); ++j)
            z[i - 1][j] = net.weight(i).row_is_zero(j) && net.weight(i + 1).col_is_zero(j);
    }
    return z;
}

namespace detail {

using Weights = std::vector<Matrix>;  // Weights[i-1] is A_i

inline void set_row(Matrix& m, std::size_t r, std::span<const double> values) {
    std::copy(values.begin(), values.end(), m.row(r).begin());
}

inline void zero_row(Matrix& m, std::size_t r) {
    for (double& e : m.row(r)) e = 0.0;
}

inline void zero_col(Matrix& m, std::size_t c) {
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = 0.0;
}

inline void check_permutation(const std::vector<std::size_t>& perm, std::size_t n, std::size_t layer) {
    if (perm.size() != n) throw DimensionError("permutation for layer " + std::to_string(layer) + " has wrong length");
    std::vector<bool> seen(n, false);
    for (std::size_t v : perm) {
        if (v >= n || seen[v]) throw ValidationError("layer " + std::to_string(layer) + ": not a permutation");
        seen[v] = true;
    }
}

// Five-segment permutation. Unit j of hidden layer i ends at perms[i-1][j]; only live units matter.
// Rows that end up free are set to the matching rows of *final_rows when given, otherwise to zero.
inline PiecewisePath permutation_path_impl(const Network& net, const std::vector<std::vector<std::size_t>>& perms,
                                           const Network* final_rows) {
    const std::size_t d = net.depth();
    if (perms.size() != d - 1) throw DimensionError("need one permutation per hidden layer");
    const auto live = live_units(net);

    bool identity = true;
    for (std::size_t i = 1; i < d; ++i) {
        check_permutation(perms[i - 1], net.width(i), i);
        const std::size_t n_live = static_cast<std::size_t>(std::count(live[i - 1].begin(), live[i - 1].end(), true));
        if (2 * n_live > net.width(i))
            throw ValidationError("permutation path: hidden layer " + std::to_string(i) + " has " +
                                  std::to_string(n_live) + " active units out of " + std::to_string(net.width(i)) +
                                  "; at least ceil(h/2) must be zeroed");
        for (std::size_t j = 0; j < net.width(i); ++j)
            if (live[i - 1][j] && perms[i - 1][j] != j) identity = false;
    }
    PiecewisePath path = PiecewisePath::starting_at(net);
    if (identity) return path;

    // Staging slot for each live unit: its final position if that position is free, otherwise the
    // lowest free position that no live unit is headed for.
    std::vector<std::vector<std::size_t>> stage(d - 1);
    std::vector<std::vector<bool>> to_live(d - 1);     // live units whose destination is currently live
    std::vector<std::vector<bool>> occupied(d - 1);    // final positions of live units
    for (std::size_t i = 1; i < d; ++i) {
        const auto& lv = live[i - 1];
        const auto& pi = perms[i - 1];
        const std::size_t h = net.width(i);
        std::vector<bool> targeted(h, false);
        occupied[i - 1].assign(h, false);
        for (std::size_t j = 0; j < h; ++j)
            if (lv[j]) targeted[pi[j]] = occupied[i - 1][pi[j]] = true;
        std::vector<std::size_t> pool;
        for (std::size_t z = 0; z < h; ++z)
            if (!lv[z] && !targeted[z]) pool.push_back(z);
        stage[i - 1].assign(h, 0);
        to_live[i - 1].assign(h, false);
        std::size_t next = 0;
        for (std::size_t j = 0; j < h; ++j) {
            if (!lv[j]) continue;
            if (!lv[pi[j]]) {
                stage[i - 1][j] = pi[j];
            } else {
                stage[i - 1][j] = pool.at(next++);
                to_live[i - 1][j] = true;
            }
        }
    }

    // 1. Copy each live row j into its staging row.
    Weights w = net.weights();
    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t j = 0; j < net.width(i); ++j)
            if (live[i - 1][j]) {
                std::vector<double> src(w[i - 1].row(j).begin(), w[i - 1].row(j).end());
                set_row(w[i - 1], stage[i - 1][j], src);
            }
    path.push(Network(w), SegmentKind::permute);

    // 2. Move each live unit's outgoing column onto its staging copy.
    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t j = 0; j < net.width(i); ++j)
            if (live[i - 1][j]) {
                Matrix& out = w[i];
                for (std::size_t r = 0; r < out.rows(); ++r) {
                    out(r, stage[i - 1][j]) = out(r, j);
                    out(r, j) = 0.0;
                }
            }
    path.push(Network(w), SegmentKind::permute);

    // 3. Copy staged rows into destinations that were occupied by live units (now silent).
    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t j = 0; j < net.width(i); ++j)
            if (to_live[i - 1][j]) {
                std::vector<double> src(w[i - 1].row(stage[i - 1][j]).begin(), w[i - 1].row(stage[i - 1][j]).end());
                set_row(w[i - 1], perms[i - 1][j], src);
            }
    path.push(Network(w), SegmentKind::permute);

    // 4. Move those outgoing columns from the staging slot to the destination.
    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t j = 0; j < net.width(i); ++j)
            if (to_live[i - 1][j]) {
                Matrix& out = w[i];
                const std::size_t from = stage[i - 1][j], to = perms[i - 1][j];
                for (std::size_t r = 0; r < out.rows(); ++r) {
                    out(r, to) = out(r, from);
                    out(r, from) = 0.0;
                }
            }
    path.push(Network(w), SegmentKind::permute);

    // 5. Clear every row that is not a destination.
    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t z = 0; z < net.width(i); ++z)
            if (!occupied[i - 1][z]) {
                if (final_rows) set_row(w[i - 1], z, final_rows->weight(i).row(z));
                else zero_row(w[i - 1], z);
            }
    path.push(Network(w), SegmentKind::permute);
    return path;
}

// Three segments that move the function from `from` to `to` by writing to's live units into free
// slots of `from`: slot[i-1][b] is where live unit b of `to` is placed in hidden layer i.
//   (b) write to's units into the free rows,
//   (a) swap the output layer over to them,
//   (b) clear every other row, or copy to's rows there when no permutation follows.
inline PiecewisePath relocation_segments(const Network& from, const Network& to,
                                         const std::vector<std::vector<std::size_t>>& slot, bool final_leg) {
    const std::size_t d = from.depth();
    const auto live_to = live_units(to);
    Weights w = from.weights();
    PiecewisePath path = PiecewisePath::starting_at(from);

    std::vector<std::vector<bool>> placed(d - 1);
    for (std::size_t i = 1; i < d; ++i) {
        placed[i - 1].assign(from.width(i), false);
        for (std::size_t b = 0; b < from.width(i); ++b)
            if (live_to[i - 1][b]) placed[i - 1][slot[i - 1][b]] = true;
    }

    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t b = 0; b < from.width(i); ++b) {
            if (!live_to[i - 1][b]) continue;
            Matrix& a = w[i - 1];
            const std::size_t row = slot[i - 1][b];
            if (i == 1) {
                set_row(a, row, to.weight(1).row(b));
            } else {
                zero_row(a, row);
                for (std::size_t c = 0; c < from.width(i - 1); ++c)
                    if (live_to[i - 2][c]) a(row, slot[i - 2][c]) = to.weight(i)(b, c);
            }
        }
    path.push(Network(w), SegmentKind::type_b);

    Matrix out(from.output_dim(), from.width(d - 1));
    for (std::size_t c = 0; c < from.width(d - 1); ++c)
        if (live_to[d - 2][c])
            for (std::size_t r = 0; r < out.rows(); ++r) out(r, slot[d - 2][c]) = to.weight(d)(r, c);
    w[d - 1] = out;
    path.push(Network(w), SegmentKind::type_a);

    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t z = 0; z < from.width(i); ++z)
            if (!placed[i - 1][z]) {
                if (final_leg) set_row(w[i - 1], z, to.weight(i).row(z));
                else zero_row(w[i - 1], z);
            }
    path.push(Network(w), SegmentKind::type_b);
    if (final_leg && !(path.back() == to)) throw std::logic_error("relocation did not reach the target network");
    return path;
}

inline std::vector<std::size_t> count_live(const Network& net) {
    std::vector<std::size_t> n;
    for (const auto& l : live_units(net)) n.push_back(static_cast<std::size_t>(std::count(l.begin(), l.end(), true)));
    return n;
}

// Relocation into the given slots, then a permutation back to to's own positions.
inline PiecewisePath connect_via_slots(const Network& from, const Network& to,
                                       const std::vector<std::vector<std::size_t>>& slot) {
    const std::size_t d = from.depth();
    const auto live_to = live_units(to);
    bool identity = true;
    for (std::size_t i = 1; i < d; ++i)
        for (std::size_t b = 0; b < from.width(i); ++b)
            if (live_to[i - 1][b] && slot[i - 1][b] != b) identity = false;
    if (identity) return relocation_segments(from, to, slot, true);

    PiecewisePath first = relocation_segments(from, to, slot, false);
    // Complete slot^{-1} on the live slots to a full permutation, remaining units in index order.
    std::vector<std::vector<std::size_t>> perms(d - 1);
    for (std::size_t i = 1; i < d; ++i) {
        const std::size_t h = from.width(i);
        std::vector<std::size_t> perm(h, h);
        std::vector<bool> used(h, false);
        for (std::size_t b = 0; b < h; ++b)
            if (live_to[i - 1][b]) {
                perm[slot[i - 1][b]] = b;
                used[b] = true;
            }
        std::size_t next = 0;
        for (std::size_t s = 0; s < h; ++s) {
            if (perm[s] != h) continue;
            while (used[next]) ++next;
            perm[s] = next;
            used[next] = true;
        }
        perms[i - 1] = std::move(perm);
    }
    PiecewisePath second = permutation_path_impl(first.back(), perms, &to);
    PiecewisePath out = concatenate(first, second);
    if (!(out.back() == to)) throw std::logic_error("drop-connect path did not reach the target network");
    return out;
}

}  // namespace detail

// Moves live unit j of hidden layer i to position perms[i-1][j] in five segments with f unchanged.
// Requires at least ceil(h_i/2) inactive units per hidden layer; identity permutations give an empty path.
inline PiecewisePath permutation_path(const Network& net, const std::vector<std::vector<std::size_t>>& perms) {
    return detail::permutation_path_impl(net, perms, nullptr);
}

// Path from net to the fully masked network apply_mask(net, mask): 4d-6 segments alternating type_a
// and type_b.
//
// Kept units K_i play the role of the top block and each kept unit a is paired with a shadow unit
// sigma_i(a) taken lowest-index-first from the dropped units; dropped units without a partner stay zero.
// In block notation with rL_i = r_{i-1} A_i[K_i, K_{i-1}] the points are:
//   (a) A_d -> [rL_d, 0]
//   for k = d-1 down to 2:
//     (b) bottom rows of A_k -> [rL_k, 0]; bottom rows of A_i -> [0, rL_i] for k < i < d
//         (for k < d-1 this also clears what the previous step left in those rows)
//     (a) A_d -> [0, rL_d]
//     (b) top rows of A_k -> [rL_k, 0]
//     (a) A_d -> [rL_d, 0]
//   (b) bottom rows of A_1 .. A_{d-1} -> 0
// which for d = 3 is the six-segment sequence with seven points.
inline PiecewisePath lemma31_path(const Network& net, const DropoutMask& mask) {
    mask.validate(net);
    const std::size_t d = net.depth();
    for (std::size_t i = 1; i < d; ++i)
        if (mask.keep[i - 1].size() > net.width(i) / 2)
            throw ValidationError("mask keeps " + std::to_string(mask.keep[i - 1].size()) + " units in hidden layer " +
                                  std::to_string(i) + "; at most floor(" + std::to_string(net.width(i)) +
                                  "/2) allowed");

    // K[i], S[i]: kept units and their shadows, in matching order. Index 0 is unused.
    std::vector<std::vector<std::size_t>> K(d), S(d);
    std::vector<std::vector<bool>> is_kept(d);
    for (std::size_t i = 1; i < d; ++i) {
        K[i] = mask.keep[i - 1];
        is_kept[i] = mask.kept(i, net.width(i));
        const auto dropped = indices_where(is_kept[i], false);
        S[i].assign(dropped.begin(), dropped.begin() + static_cast<std::ptrdiff_t>(K[i].size()));
    }
    auto r = [&](std::size_t layer) { return mask.rescale[layer - 1]; };
    const Network& orig = net;

    // Row for a unit of layer i (2 <= i < d) reading r_{i-1} L_i from the kept block or the shadow block.
    auto scaled_row = [&](std::size_t i, std::size_t n, bool from_shadows) {
        std::vector<double> row(net.width(i - 1), 0.0);
        for (std::size_t m = 0; m < K[i - 1].size(); ++m) {
            const std::size_t col = from_shadows ? S[i - 1][m] : K[i - 1][m];
            row[col] = r(i - 1) * orig.weight(i)(K[i][n], K[i - 1][m]);
        }
        return row;
    };
    auto output_layer = [&](bool to_shadows) {
        Matrix a(net.output_dim(), net.width(d - 1));
        for (std::size_t row = 0; row < a.rows(); ++row)
            for (std::size_t m = 0; m < K[d - 1].size(); ++m)
                a(row, to_shadows ? S[d - 1][m] : K[d - 1][m]) = r(d - 1) * orig.weight(d)(row, K[d - 1][m]);
        return a;
    };
    auto clear_bottom = [&](detail::Weights& w, std::size_t i) {
        for (std::size_t j = 0; j < net.width(i); ++j)
            if (!is_kept[i][j]) detail::zero_row(w[i - 1], j);
    };

    detail::Weights w = net.weights();
    PiecewisePath path = PiecewisePath::starting_at(net);

    w[d - 1] = output_layer(false);
    path.push(Network(w), SegmentKind::type_a);

    for (std::size_t k = d - 1; k >= 2; --k) {
        clear_bottom(w, k);
        for (std::size_t n = 0; n < K[k].size(); ++n) detail::set_row(w[k - 1], S[k][n], scaled_row(k, n, false));
        for (std::size_t i = k + 1; i < d; ++i) {
            clear_bottom(w, i);
            for (std::size_t n = 0; n < K[i].size(); ++n) detail::set_row(w[i - 1], S[i][n], scaled_row(i, n, true));
        }
        path.push(Network(w), SegmentKind::type_b);

        w[d - 1] = output_layer(true);
        path.push(Network(w), SegmentKind::type_a);

        for (std::size_t n = 0; n < K[k].size(); ++n) detail::set_row(w[k - 1], K[k][n], scaled_row(k, n, false));
        path.push(Network(w), SegmentKind::type_b);

        w[d - 1] = output_layer(false);
        path.push(Network(w), SegmentKind::type_a);
    }

    for (std::size_t i = 1; i < d; ++i) clear_bottom(w, i);
    path.push(Network(w), SegmentKind::type_b);
    if (!(path.back() == apply_mask(net, mask))) throw std::logic_error("lemma31_path did not reach the masked network");
    return path;
}

// Path between two networks: netB's live units are written into netA's free units (lowest index
// first), the output layer switches over, netA's units are cleared, and a permutation returns netB's
// units to their own positions. 3 + 5 segments, or 3 when the relocation already lands on netB's
// positions. Needs, per hidden layer, at least as many free units in netA as live units in netB, and
// netB's live units within half the layer; two networks with ceil(h/2) zeroed units always qualify.
inline PiecewisePath drop_connect_path(const Network& netA, const Network& netB) {
    if (!netA.same_shape(netB)) throw DimensionError("drop_connect_path: networks have different shapes");
    const std::size_t d = netA.depth();
    const auto live_a = live_units(netA);
    const auto live_b = live_units(netB);
    std::vector<std::vector<std::size_t>> slot(d - 1);
    for (std::size_t i = 1; i < d; ++i) {
        const std::size_t h = netA.width(i);
        const auto free_a = indices_where(live_a[i - 1], false);
        const auto used_b = indices_where(live_b[i - 1], true);
        if (free_a.size() < used_b.size() || 2 * used_b.size() > h)
            throw ValidationError("drop_connect_path: hidden layer " + std::to_string(i) + " has " +
                                  std::to_string(free_a.size()) + " free units in the first network and " +
                                  std::to_string(used_b.size()) + " active units in the second (width " +
                                  std::to_string(h) + "); zero at least ceil(h/2) units in both");
        slot[i - 1].assign(h, 0);
        for (std::size_t n = 0; n < used_b.size(); ++n) slot[i - 1][used_b[n]] = free_a[n];
    }
    return detail::connect_via_slots(netA, netB, slot);
}

// lemma31(A) ++ drop_connect(A_1, B_1) ++ reverse(lemma31(B)).
inline PiecewisePath theorem31_path(const Network& netA, const DropoutMask& maskA, const Network& netB,
                                    const DropoutMask& maskB) {
    if (!netA.same_shape(netB)) throw DimensionError("theorem31_path: networks have different shapes");
    PiecewisePath a = lemma31_path(netA, maskA);
    PiecewisePath b = lemma31_path(netB, maskB);
    return concatenate(concatenate(a, drop_connect_path(a.back(), b.back())), reversed(b));
}

// One segment from net to column dropout applied to A_2..A_d.
inline PiecewisePath direct_dropout_path(const Network& net, double p, std::uint64_t seed) {
    check_open_probability(p);
    PiecewisePath path = PiecewisePath::starting_at(net);
    path.push(algorithm1_network(net, p, seed), SegmentKind::interp);
    return path;
}

struct DropoutRetry {
    std::vector<std::size_t> min_free;  // free units required per hidden layer; empty means no requirement
    const LabeledDataset* data = nullptr;  // when set, the segment's loss penalty must fit the budget
    LossKind kind = LossKind::squared;
    double budget = std::numeric_limits<double>::infinity();
    std::size_t samples_per_segment = 8;
    std::size_t max_attempts = 16;
};

struct DirectDropout {
    PiecewisePath path;
    std::size_t attempts = 0;
    std::uint64_t seed_used = 0;
    std::optional<double> penalty;  // max loss along the segment minus the starting loss
    bool within_budget = true;
    bool skipped = false;           // the network already had enough free units
    std::vector<std::string> warnings;
};

inline std::vector<std::size_t> free_counts(const Network& net) {
    std::vector<std::size_t> out;
    for (const auto& l : live_units(net)) out.push_back(static_cast<std::size_t>(std::count(l.begin(), l.end(), false)));
    return out;
}

inline bool has_free_units(const Network& net, const std::vector<std::size_t>& need) {
    if (need.empty()) return true;
    const auto have = free_counts(net);
    for (std::size_t i = 0; i < have.size(); ++i)
        if (have[i] < need.at(i)) return false;
    return true;
}

// Direct dropout with resampling. Attempt a uses seed (a = 0) or derive_seed(seed, a). An attempt is
// accepted when it frees the required units and, if data is given, its penalty is within budget.
// When no attempt meets the budget the structurally valid attempt with the smallest penalty is returned
// with within_budget = false; when none frees enough units a ConstructionError is thrown.
// If net already has the required free units the segment is constant.
inline DirectDropout direct_dropout_with_retry(const Network& net, double p, std::uint64_t seed,
                                               const DropoutRetry& retry = {}) {
    check_open_probability(p);
    DirectDropout best;
    if (p > 0.75) best.warnings.push_back("p = " + std::to_string(p) + " exceeds 3/4");
    if (p * static_cast<double>(net.min_hidden_width()) < 1.0)
        best.warnings.push_back("p = " + std::to_string(p) + " is below 1/h_min");

    double base = 0.0;
    if (retry.data) base = loss(net, *retry.data, retry.kind).value;
    auto penalty_of = [&](const PiecewisePath& path) {
        const PathProfile prof = eval_path(path, *retry.data, retry.kind, retry.samples_per_segment);
        return prof.max_loss - base;
    };

    if (!retry.min_free.empty() && has_free_units(net, retry.min_free)) {
        best.path = PiecewisePath::starting_at(net);
        best.path.push(net, SegmentKind::interp);
        best.skipped = true;
        best.seed_used = seed;
        if (retry.data) best.penalty = penalty_of(best.path);
        return best;
    }

    std::optional<DirectDropout> fallback;
    for (std::size_t a = 0; a < retry.max_attempts; ++a) {
        const std::uint64_t s = a == 0 ? seed : derive_seed(seed, a);
        PiecewisePath path = direct_dropout_path(net, p, s);
        if (!has_free_units(path.back(), retry.min_free)) continue;
        std::optional<double> pen;
        if (retry.data) pen = penalty_of(path);
        if (!pen || *pen <= retry.budget) {
            best.path = std::move(path);
            best.seed_used = s;
            best.penalty = pen;
            best.attempts = a + 1;
            return best;
        }
        if (!fallback || *pen < *fallback->penalty) {
            fallback = best;
            fallback->path = std::move(path);
            fallback->seed_used = s;
            fallback->penalty = pen;
            fallback->within_budget = false;
        }
    }
    if (!fallback)
        throw ConstructionError("direct dropout: no sample out of " + std::to_string(retry.max_attempts) +
                                " freed enough units; increase p or the width");
    fallback->attempts = retry.max_attempts;
    return *fallback;
}

inline std::vector<std::size_t> half_widths_up(const Network& net) {
    std::vector<std::size_t> need;
    for (std::size_t i = 1; i < net.depth(); ++i) need.push_back((net.width(i) + 1) / 2);
    return need;
}

// direct_dropout(A) ++ drop_connect ++ reverse(direct_dropout(B)); 10 segments.
inline PiecewisePath theorem41_path(const Network& netA, const Network& netB, double p = 0.75,
                                    std::uint64_t seedA = 1, std::uint64_t seedB = 2, DropoutRetry retry = {}) {
    if (!netA.same_shape(netB)) throw DimensionError("theorem41_path: networks have different shapes");
    retry.min_free = half_widths_up(netA);
    const DirectDropout a = direct_dropout_with_retry(netA, p, seedA, retry);
    const DirectDropout b = direct_dropout_with_retry(netB, p, seedB, retry);
    return concatenate(concatenate(a.path, drop_connect_path(a.path.back(), b.path.back())), reversed(b.path));
}

// Copies a narrow network into the wide architecture of `like`, unit u of hidden layer i going to
// position pos[i-1][u]; everything else is zero.
inline Network embed(const Network& narrow, const Network& like, const std::vector<std::vector<std::size_t>>& pos) {
    const std::size_t d = like.depth();
    if (narrow.depth() != d || narrow.input_dim() != like.input_dim() || narrow.output_dim() != like.output_dim())
        throw DimensionError("embed: depth, input or output dimension differs");
    auto at = [&](std::size_t layer, std::size_t u) { return (layer == 0 || layer == d) ? u : pos[layer - 1][u]; };
    std::vector<Matrix> w;
    for (std::size_t i = 1; i <= d; ++i) {
        Matrix m(like.width(i), like.width(i - 1));
        const Matrix& src = narrow.weight(i);
        for (std::size_t r = 0; r < src.rows(); ++r)
            for (std::size_t c = 0; c < src.cols(); ++c) m(at(i, r), at(i - 1, c)) = src(r, c);
        w.push_back(std::move(m));
    }
    return Network(std::move(w));
}

// Zero-padding embedding: narrow unit u sits at position u.
inline Network embed(const Network& narrow, const Network& like) {
    std::vector<std::vector<std::size_t>> pos;
    for (std::size_t i = 1; i < like.depth(); ++i) {
        if (narrow.width(i) > like.width(i)) throw DimensionError("embed: narrow network is wider than the target");
        std::vector<std::size_t> p(narrow.width(i));
        for (std::size_t u = 0; u < p.size(); ++u) p[u] = u;
        pos.push_back(std::move(p));
    }
    return embed(narrow, like, pos);
}

struct TeacherStudentParts {
    PiecewisePath path;
    DirectDropout drop_a;
    DirectDropout drop_b;
    Network teacher_embedded;  // the teacher at the positions the path passes through
};

// Routes two wide networks through a narrow network netStar:
//   1 segment  A -> A_1 (direct dropout freeing at least h*_i units per layer)
//   8 segments A_1 -> netStar placed in free units of B_1 (relocation + permutation)
//   3 segments that point -> B_1 (B_1's units are already free there, no second permutation)
//   1 segment  B_1 -> B
// The teacher's positions avoid the slots the relocation uses whenever B_1 has room, so the permutation
// is non-trivial; if it happens to be the identity the middle leg has 3 segments.
inline TeacherStudentParts teacher_student_parts(const Network& netA, const Network& netB, const Network& netStar,
                                                 double p, std::uint64_t seedA = 1, std::uint64_t seedB = 2,
                                                 DropoutRetry retry = {}) {
    if (!netA.same_shape(netB)) throw DimensionError("teacher_student_path: students have different shapes");
    const std::size_t d = netA.depth();
    if (netStar.depth() != d || netStar.input_dim() != netA.input_dim() || netStar.output_dim() != netA.output_dim())
        throw DimensionError("teacher_student_path: teacher depth or input/output dimension differs");
    double ratio = 0.0;
    for (std::size_t i = 1; i < d; ++i) {
        if (netStar.width(i) > netA.width(i)) throw ValidationError("teacher is wider than the students");
        ratio = std::max(ratio, static_cast<double>(netStar.width(i)) / static_cast<double>(netA.width(i)));
    }
    if (!(1.5 * ratio <= p + 1e-12 && p <= 0.75))
        throw ValidationError("width condition violated: need 1.5 * max(h*/h) = " + std::to_string(1.5 * ratio) +
                              " <= p = " + std::to_string(p) + " <= 0.75");

    retry.min_free.clear();
    for (std::size_t i = 1; i < d; ++i) retry.min_free.push_back(netStar.width(i));
    TeacherStudentParts parts;
    parts.drop_a = direct_dropout_with_retry(netA, p, seedA, retry);
    parts.drop_b = direct_dropout_with_retry(netB, p, seedB, retry);
    const Network& a1 = parts.drop_a.path.back();
    const Network& b1 = parts.drop_b.path.back();

    const auto live_a1 = live_units(a1);
    const auto live_b1 = live_units(b1);
    const auto live_star = live_units(netStar);
    std::vector<std::vector<std::size_t>> pos(d - 1);
    for (std::size_t i = 1; i < d; ++i) {
        const std::size_t n_star = netStar.width(i);
        const auto free_a = indices_where(live_a1[i - 1], false);
        const std::size_t n_live = static_cast<std::size_t>(std::count(live_star[i - 1].begin(), live_star[i - 1].end(), true));
        std::vector<bool> relocation_slot(netA.width(i), false);
        for (std::size_t n = 0; n < n_live; ++n) relocation_slot[free_a[n]] = true;
        std::vector<std::size_t> preferred, fallback;
        for (std::size_t z : indices_where(live_b1[i - 1], false)) (relocation_slot[z] ? fallback : preferred).push_back(z);
        preferred.insert(preferred.end(), fallback.begin(), fallback.end());
        preferred.resize(n_star);
        pos[i - 1] = std::move(preferred);
    }
    parts.teacher_embedded = embed(netStar, netA, pos);

    PiecewisePath mid1 = drop_connect_path(a1, parts.teacher_embedded);

    std::vector<std::vector<std::size_t>> identity(d - 1);
    for (std::size_t i = 1; i < d; ++i) {
        identity[i - 1].resize(netA.width(i));
        for (std::size_t j = 0; j < identity[i - 1].size(); ++j) identity[i - 1][j] = j;
    }
    PiecewisePath mid2 = detail::relocation_segments(parts.teacher_embedded, b1, identity, true);

    parts.path = concatenate(concatenate(concatenate(parts.drop_a.path, mid1), mid2), reversed(parts.drop_b.path));
    return parts;
}

inline PiecewisePath teacher_student_path(const Network& netA, const Network& netB, const Network& netStar, double p,
                                          std::uint64_t seedA = 1, std::uint64_t seedB = 2, DropoutRetry retry = {}) {
    return teacher_student_parts(netA, netB, netStar, p, seedA, seedB, std::move(retry)).path;
}

// Straight line between two networks.
inline PiecewisePath linear_path(const Network& a, const Network& b) {
    PiecewisePath p = PiecewisePath::starting_at(a);
    p.push(b, SegmentKind::interp);
    return p;
}

}  // namespace modecon
