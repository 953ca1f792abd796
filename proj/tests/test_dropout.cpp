#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "modecon/dropout.hpp"
#include "support/oracles.hpp"

using namespace modecon;

namespace {

// One hidden layer whose second half duplicates the first; the output weights are split equally,
// so dropping either half with r = 2 leaves f unchanged.
Network duplicated_net(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const Matrix half = oracle::random_matrix(4, 3, gen);
    const Matrix out = oracle::random_matrix(2, 4, gen);
    Matrix a1(8, 3), a2(2, 8);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 3; ++c) a1(r, c) = a1(r + 4, c) = half(r, c);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 4; ++c) a2(r, c) = a2(r, c + 4) = 0.5 * out(r, c);
    return Network({a1, a2});
}

LabeledDataset data_for(const Network& net, std::size_t n, std::uint64_t seed) {
    const auto xs = oracle::random_inputs(n, net.input_dim(), seed);
    std::vector<Vector> ys;
    for (const auto& x : xs) ys.push_back(output(net, x));
    return make_regression(xs, ys);
}

}  // namespace

TEST(ColumnDropout, ColumnsAreDroppedOrRescaled) {
    std::mt19937_64 gen(1);
    const Matrix a = oracle::random_matrix(5, 40, gen);
    const double p = 0.3;
    const Matrix d = algorithm1_dropout(a, p, 99);
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const bool dropped = d(0, c) == 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r)
            EXPECT_EQ(d(r, c), dropped ? 0.0 : a(r, c) * (1.0 / (1.0 - p)));
    }
}

TEST(ColumnDropout, SameSeedIsBitIdentical) {
    std::mt19937_64 gen(2);
    const Matrix a = oracle::random_matrix(6, 6, gen);
    EXPECT_EQ(algorithm1_dropout(a, 0.5, 7), algorithm1_dropout(a, 0.5, 7));
    EXPECT_NE(algorithm1_dropout(a, 0.5, 7), algorithm1_dropout(a, 0.5, 8));
}

TEST(ColumnDropout, RejectsProbabilitiesOutsideOpenInterval) {
    const Matrix a(2, 2, {1, 2, 3, 4});
    EXPECT_THROW(algorithm1_dropout(a, 0.0, 1), ValidationError);
    EXPECT_THROW(algorithm1_dropout(a, 1.0, 1), ValidationError);
    EXPECT_THROW(algorithm1_dropout(a, -0.1, 1), ValidationError);
}

TEST(ColumnDropout, MonteCarloMeanIsUnbiased) {
    // Mean of 20000 draws of a single column; the variance of each entry is a^2 p/(1-p).
    const Matrix a(3, 1, {1.0, -2.0, 0.5});
    const double p = 0.4, n = 20000;
    Vector sum(3, 0.0);
    for (std::size_t s = 0; s < 20000; ++s) {
        const Matrix d = algorithm1_dropout(a, p, derive_seed(3, s));
        for (std::size_t r = 0; r < 3; ++r) sum[r] += d(r, 0);
    }
    for (std::size_t r = 0; r < 3; ++r) {
        const double sigma = std::abs(a(r, 0)) * std::sqrt(p / (1 - p) / n);
        EXPECT_NEAR(sum[r] / n, a(r, 0), 4 * sigma);
    }
}

TEST(ColumnDropout, NetworkVersionLeavesFirstLayer) {
    const Network net = oracle::random_net({3, 6, 6, 2}, 5);
    const Network d = algorithm1_network(net, 0.5, 11);
    EXPECT_EQ(d.weight(1), net.weight(1));
    EXPECT_EQ(d.weight(2), algorithm1_dropout(net.weight(2), 0.5, derive_seed(11, 2)));
    EXPECT_EQ(d.weight(3), algorithm1_dropout(net.weight(3), 0.5, derive_seed(11, 3)));
}

TEST(ApplyMask, FullMaskWithUnitScaleIsIdentity) {
    const Network net = oracle::random_net({3, 5, 4, 2}, 1);
    EXPECT_EQ(apply_mask(net, DropoutMask::full(net)), net);
}

TEST(ApplyMask, DuplicatedUnitsSurviveHalfDropout) {
    const Network net = duplicated_net(3);
    DropoutMask m;
    m.keep = {{0, 1, 2, 3}};
    m.rescale = {2.0};
    const Network masked = apply_mask(net, m);
    for (const auto& x : oracle::random_inputs(20, 3, 4)) {
        const Vector a = output(net, x), b = output(masked, x);
        for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12 * (1 + std::abs(a[k])));
    }
}

TEST(ApplyMask, DroppingEveryUnitGivesZeroFunction) {
    const Network net = oracle::random_net({3, 5, 2}, 2);
    DropoutMask m;
    m.keep = {{}};
    m.rescale = {1.0};
    EXPECT_EQ(output(apply_mask(net, m), {1, 2, 3}), (Vector{0, 0}));
}

TEST(ApplyMask, DroppedRowsAndColumnsAreExactlyZero) {
    const Network net = oracle::random_net({4, 10, 9, 3}, 7);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const DropoutMask m = sample_mask(net, 0.5, seed);
        const Network out = apply_mask(net, m);
        for (std::size_t i = 1; i < net.depth(); ++i) {
            const auto kept = m.kept(i, net.width(i));
            for (std::size_t j = 0; j < kept.size(); ++j) {
                EXPECT_EQ(out.weight(i).row_is_zero(j), !kept[j] || net.weight(i).row_is_zero(j));
                if (!kept[j]) EXPECT_TRUE(out.weight(i + 1).col_is_zero(j));
            }
        }
    }
}

TEST(ApplyMask, IdempotentWithUnitScale) {
    const Network net = oracle::random_net({4, 10, 9, 3}, 8);
    DropoutMask m = sample_mask(net, 0.5, 1);
    m.rescale.assign(m.rescale.size(), 1.0);
    const Network once = apply_mask(net, m);
    EXPECT_EQ(apply_mask(once, m), once);
}

TEST(ApplyMask, ZeroPatternIsIdempotentForAnyScale) {
    const Network net = oracle::random_net({4, 10, 9, 3}, 9);
    const DropoutMask m = sample_mask(net, 0.5, 2);
    const Network once = apply_mask(net, m), twice = apply_mask(once, m);
    for (std::size_t i = 1; i <= net.depth(); ++i)
        for (std::size_t q = 0; q < once.weight(i).data().size(); ++q)
            EXPECT_EQ(once.weight(i).data()[q] == 0.0, twice.weight(i).data()[q] == 0.0);
}

TEST(ApplyMask, ValidatesIndices) {
    const Network net = oracle::random_net({3, 4, 2}, 1);
    DropoutMask m;
    m.keep = {{0, 4}};
    m.rescale = {1.0};
    EXPECT_THROW(apply_mask(net, m), ValidationError);
    m.keep = {{1, 0}};
    EXPECT_THROW(apply_mask(net, m), ValidationError);
    m.keep = {{0}};
    m.rescale = {0.0};
    EXPECT_THROW(apply_mask(net, m), ValidationError);
    m.keep = {{0}, {0}};
    m.rescale = {1.0, 1.0};
    EXPECT_THROW(apply_mask(net, m), DimensionError);
}

TEST(SampleMask, KeepsFloorOfSurvivingFraction) {
    EXPECT_EQ(keep_count(32, 0.5), 16u);
    EXPECT_EQ(keep_count(10, 0.3), 7u);
    EXPECT_EQ(keep_count(7, 0.5), 3u);
    const Network net = oracle::random_net({3, 10, 7, 2}, 1);
    const DropoutMask m = sample_mask(net, 0.3, 4);
    EXPECT_EQ(m.keep[0].size(), 7u);
    EXPECT_EQ(m.keep[1].size(), 4u);
    EXPECT_DOUBLE_EQ(m.rescale[0], 1.0 / 0.7);
    EXPECT_THROW(sample_mask(oracle::random_net({3, 1, 2}, 1), 0.5, 1), ValidationError);
}

TEST(StabilitySearch, ZeroProbabilityHasZeroGap) {
    const Network net = oracle::random_net({3, 6, 2}, 1);
    const LabeledDataset d = data_for(oracle::random_net({3, 6, 2}, 2), 30, 3);
    const StabilityGap g = dropout_stability_search(net, d, LossKind::squared, 0.0, 5, 1);
    EXPECT_EQ(g.gap, 0.0);
    EXPECT_EQ(g.mask, DropoutMask::full(net));
}

TEST(StabilitySearch, FindsTheRedundantHalf) {
    const Network net = duplicated_net(5);
    const LabeledDataset d = data_for(net, 50, 6);
    // 16 of the 70 half-subsets keep exactly one copy of each unit and reproduce f exactly.
    const StabilityGap g = dropout_stability_search(net, d, LossKind::squared, 0.5, 400, 1);
    EXPECT_LE(g.gap, 1e-9);
    EXPECT_EQ(g.trials, 400u);
    EXPECT_DOUBLE_EQ(g.gap, g.best_masked_loss - g.base_loss);
}

TEST(StabilitySearch, DeterministicAndBestOfTrials) {
    const Network net = oracle::random_net({3, 12, 12, 2}, 3);
    const LabeledDataset d = data_for(oracle::random_net({3, 12, 12, 2}, 4), 40, 5);
    const StabilityGap a = dropout_stability_search(net, d, LossKind::squared, 0.5, 10, 9);
    const StabilityGap b = dropout_stability_search(net, d, LossKind::squared, 0.5, 10, 9);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.best_masked_loss, b.best_masked_loss);
    for (std::size_t t = 0; t < 10; ++t) {
        const double l = loss(apply_mask(net, sample_mask(net, 0.5, derive_seed(9, t))), d, LossKind::squared).value;
        EXPECT_LE(a.best_masked_loss, l);
    }
    EXPECT_THROW(dropout_stability_search(net, d, LossKind::squared, 0.5, 0, 1), ValidationError);
}

TEST(StabilitySearch, SuffixLossesEndWithOutputSideMask) {
    const Network net = oracle::random_net({3, 8, 8, 2}, 6);
    const LabeledDataset d = data_for(oracle::random_net({3, 8, 8, 2}, 7), 30, 8);
    const DropoutMask m = sample_mask(net, 0.5, 1);
    const auto l = suffix_mask_losses(net, d, LossKind::squared, m);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], loss(apply_mask(net, m), d, LossKind::squared).value);
    EXPECT_EQ(l[1], loss(apply_mask_from(net, m, 2), d, LossKind::squared).value);
}

TEST(StabilitySearch, RescaleRefinementNeverHurts) {
    const Network net = oracle::random_net({3, 10, 10, 2}, 10);
    const LabeledDataset d = data_for(net, 40, 11);
    const DropoutMask m = sample_mask(net, 0.5, 3);
    const DropoutMask refined = refine_rescale(net, d, LossKind::squared, m);
    EXPECT_LE(loss(apply_mask(net, refined), d, LossKind::squared).value,
              loss(apply_mask(net, m), d, LossKind::squared).value);
    EXPECT_EQ(refined.keep, m.keep);
}
