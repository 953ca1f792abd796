#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "modecon/paths.hpp"
#include "support/oracles.hpp"

using namespace modecon;

namespace {

LabeledDataset random_regression(std::size_t n, std::size_t in, std::size_t out, std::uint64_t seed) {
    const auto xs = oracle::random_inputs(n, in, seed);
    const auto ys = oracle::random_inputs(n, out, seed + 1);
    return make_regression(xs, ys);
}

double max_output_change(const PiecewisePath& path, std::size_t k, const std::vector<Vector>& xs) {
    double worst = 0.0;
    for (double tau : {0.25, 0.5, 0.75, 1.0}) {
        const Network mid = lerp(path.points[k], path.points[k + 1], tau);
        for (const auto& x : xs) worst = std::max(worst, oracle::rel_diff(output(mid, x), output(path.points[k], x)));
    }
    return worst;
}

// Half of every hidden layer zeroed, so the network has ceil(h/2) free units.
Network half_zeroed(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    const Network net = oracle::random_net(dims, seed);
    return apply_mask(net, sample_mask(net, 0.5, seed));
}

std::vector<std::vector<std::size_t>> random_perms(const Network& net, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::vector<std::size_t>> perms;
    for (std::size_t i = 1; i < net.depth(); ++i) {
        std::vector<std::size_t> p(net.width(i));
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), gen);
        perms.push_back(std::move(p));
    }
    return perms;
}

}  // namespace

TEST(MaskingPath, EndpointsAndSegmentCount) {
    for (std::size_t d = 3; d <= 6; ++d) {
        std::vector<std::size_t> dims{4};
        for (std::size_t i = 1; i < d; ++i) dims.push_back(10);
        dims.push_back(2);
        const Network net = oracle::random_net(dims, d);
        const DropoutMask m = sample_mask(net, 0.5, d);
        const PiecewisePath path = lemma31_path(net, m);
        EXPECT_EQ(path.segments(), 4 * d - 6);
        EXPECT_EQ(path.front(), net);
        EXPECT_EQ(path.back(), apply_mask(net, m));
        for (std::size_t k = 0; k < path.segments(); ++k)
            EXPECT_EQ(path.labels[k], k % 2 == 0 ? SegmentKind::type_a : SegmentKind::type_b);
    }
}

TEST(MaskingPath, TypeBSegmentsPreserveTheFunction) {
    const Network net = oracle::random_net({4, 12, 10, 8, 2}, 3);
    const PiecewisePath path = lemma31_path(net, sample_mask(net, 0.5, 4));
    const auto xs = oracle::random_inputs(20, 4, 5);
    for (std::size_t k = 0; k < path.segments(); ++k)
        if (path.labels[k] == SegmentKind::type_b) EXPECT_LE(max_output_change(path, k, xs), 1e-12);
}

TEST(MaskingPath, TypeASegmentsAreConvexInTheLoss) {
    const Network net = oracle::random_net({4, 12, 10, 2}, 6);
    const LabeledDataset data = random_regression(30, 4, 2, 7);
    const PiecewisePath path = lemma31_path(net, sample_mask(net, 0.5, 8));
    for (std::size_t k = 0; k < path.segments(); ++k) {
        if (path.labels[k] != SegmentKind::type_a) continue;
        const double l0 = loss(path.points[k], data, LossKind::squared).value;
        const double l1 = loss(path.points[k + 1], data, LossKind::squared).value;
        for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double l = loss(lerp(path.points[k], path.points[k + 1], tau), data, LossKind::squared).value;
            EXPECT_LE(l, (1 - tau) * l0 + tau * l1 + 1e-12);
        }
    }
}

TEST(MaskingPath, RejectsMismatchedMask) {
    const Network net = oracle::random_net({3, 6, 6, 2}, 1);
    DropoutMask m = sample_mask(net, 0.5, 1);
    m.keep.pop_back();
    EXPECT_THROW(lemma31_path(net, m), DimensionError);
}

TEST(PermutationPath, FiveSegmentsPreservingTheFunction) {
    const Network net = half_zeroed({3, 8, 8, 2}, 11);
    const auto perms = random_perms(net, 12);
    const PiecewisePath path = permutation_path(net, perms);
    EXPECT_EQ(path.segments(), 5u);
    EXPECT_EQ(path.front(), net);
    const auto xs = oracle::random_inputs(20, 3, 13);
    for (std::size_t k = 0; k < path.segments(); ++k) EXPECT_LE(max_output_change(path, k, xs), 1e-12);
    // Live unit j of each hidden layer now sits at perms[i-1][j].
    const auto live_before = live_units(net), live_after = live_units(path.back());
    for (std::size_t i = 1; i < net.depth(); ++i)
        for (std::size_t j = 0; j < net.width(i); ++j)
            if (live_before[i - 1][j]) EXPECT_TRUE(live_after[i - 1][perms[i - 1][j]]);
}

TEST(PermutationPath, IdentityGivesEmptyPath) {
    const Network net = half_zeroed({3, 6, 2}, 2);
    std::vector<std::vector<std::size_t>> id(1, std::vector<std::size_t>(6));
    std::iota(id[0].begin(), id[0].end(), 0);
    EXPECT_EQ(permutation_path(net, id).segments(), 0u);
}

TEST(PermutationPath, RejectsInvalidPermutation) {
    const Network net = half_zeroed({3, 6, 2}, 2);
    EXPECT_THROW(permutation_path(net, {{0, 0, 1, 2, 3, 4}}), ValidationError);
    EXPECT_THROW(permutation_path(net, {{0, 1, 2}}), ValidationError);
}

TEST(DropConnect, EndsExactlyAtTheSecondNetwork) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Network a = half_zeroed({3, 10, 8, 2}, 100 + seed), b = half_zeroed({3, 10, 8, 2}, 200 + seed);
        const PiecewisePath path = drop_connect_path(a, b);
        EXPECT_EQ(path.front(), a);
        EXPECT_EQ(path.back(), b);
        EXPECT_TRUE(path.segments() == 8u || path.segments() == 3u);
    }
}

TEST(DropConnect, FullNetworksViolateThePrecondition) {
    const Network a = oracle::random_net({3, 6, 2}, 1), b = oracle::random_net({3, 6, 2}, 2);
    EXPECT_THROW(drop_connect_path(a, b), ValidationError);
    EXPECT_THROW(drop_connect_path(a, oracle::random_net({3, 5, 2}, 2)), DimensionError);
}

TEST(MaskedPath, ConnectsTwoNetworks) {
    const Network a = oracle::random_net({4, 16, 16, 2}, 1), b = oracle::random_net({4, 16, 16, 2}, 2);
    const PiecewisePath path = theorem31_path(a, sample_mask(a, 0.5, 3), b, sample_mask(b, 0.5, 4));
    EXPECT_EQ(path.front(), a);
    EXPECT_EQ(path.back(), b);
    EXPECT_EQ(path.segments(), 20u);
    EXPECT_EQ(path.count(SegmentKind::type_a) + path.count(SegmentKind::type_b) + path.count(SegmentKind::interp) +
                  path.count(SegmentKind::permute),
              20u);
}

TEST(DirectDropoutPath, TenSegmentsBetweenEndpoints) {
    const Network a = oracle::random_net({4, 16, 16, 2}, 5), b = oracle::random_net({4, 16, 16, 2}, 6);
    const PiecewisePath path = theorem41_path(a, b, 0.75, 1, 2);
    EXPECT_EQ(path.front(), a);
    EXPECT_EQ(path.back(), b);
    EXPECT_EQ(path.segments(), 10u);
}

TEST(DirectDropout, RetryReportsAttemptsAndFreesUnits) {
    const Network net = oracle::random_net({4, 16, 16, 2}, 7);
    DropoutRetry retry;
    retry.min_free = {8, 8};
    const DirectDropout r = direct_dropout_with_retry(net, 0.75, 3, retry);
    EXPECT_GE(r.attempts, 1u);
    const auto f = free_counts(r.path.back());
    EXPECT_GE(f[0], 8u);
    EXPECT_GE(f[1], 8u);
    EXPECT_EQ(r.path.back().weight(1), net.weight(1));
}

TEST(DirectDropout, AlreadyFreeNetworkIsSkipped) {
    const Network net = half_zeroed({3, 8, 8, 2}, 3);
    DropoutRetry retry;
    retry.min_free = {4, 4};
    const DirectDropout r = direct_dropout_with_retry(net, 0.5, 1, retry);
    EXPECT_TRUE(r.skipped);
    EXPECT_EQ(r.path.back(), net);
}

TEST(TeacherStudent, ThirteenSegmentsThroughTheTeacher) {
    const Network teacher = oracle::random_net({4, 4, 4, 1}, 9);
    const Network a = oracle::random_net({4, 16, 16, 1}, 10), b = oracle::random_net({4, 16, 16, 1}, 11);
    const TeacherStudentParts parts = teacher_student_parts(a, b, teacher, 0.5, 1, 2);
    EXPECT_EQ(parts.path.front(), a);
    EXPECT_EQ(parts.path.back(), b);
    EXPECT_EQ(parts.path.segments(), 13u);
    const auto xs = oracle::random_inputs(10, 4, 12);
    const bool visits_teacher = std::any_of(parts.path.points.begin(), parts.path.points.end(), [&](const Network& n) {
        return std::all_of(xs.begin(), xs.end(),
                           [&](const Vector& x) { return oracle::rel_diff(output(n, x), output(teacher, x)) < 1e-12; });
    });
    EXPECT_TRUE(visits_teacher);
}

TEST(TeacherStudent, WidthConditionIsChecked) {
    const Network teacher = oracle::random_net({4, 8, 8, 1}, 9);
    const Network a = oracle::random_net({4, 16, 16, 1}, 10), b = oracle::random_net({4, 16, 16, 1}, 11);
    // 1.5 * 8/16 = 0.75 > 0.5.
    EXPECT_THROW(teacher_student_parts(a, b, teacher, 0.5), ValidationError);
    EXPECT_THROW(teacher_student_parts(a, b, oracle::random_net({4, 32, 8, 1}, 1), 0.75), ValidationError);
}

TEST(PiecewisePath, AtHitsBreakpointsExactly) {
    const Network a = oracle::random_net({3, 6, 6, 2}, 1);
    const PiecewisePath path = lemma31_path(a, sample_mask(a, 0.5, 2));
    EXPECT_EQ(path.at(0.0), path.front());
    EXPECT_EQ(path.at(1.0), path.back());
    EXPECT_EQ(path.at(-1.0), path.front());
    const double s = static_cast<double>(path.segments());
    for (std::size_t k = 0; k < path.segments(); ++k) EXPECT_EQ(path.at(static_cast<double>(k) / s), path.points[k]);
}

TEST(PiecewisePath, ReversedAndConcatenate) {
    const Network a = oracle::random_net({3, 6, 6, 2}, 1);
    const PiecewisePath p = lemma31_path(a, sample_mask(a, 0.5, 2));
    const PiecewisePath r = reversed(p);
    EXPECT_EQ(r.front(), p.back());
    EXPECT_EQ(r.back(), p.front());
    EXPECT_EQ(r.labels.front(), p.labels.back());
    const PiecewisePath both = concatenate(p, r);
    EXPECT_EQ(both.segments(), 2 * p.segments());
    EXPECT_THROW(concatenate(p, p), std::logic_error);
    PiecewisePath q = PiecewisePath::starting_at(a);
    EXPECT_THROW(q.push(oracle::random_net({3, 5, 6, 2}, 1), SegmentKind::interp), DimensionError);
}

TEST(EvalPath, GridAndBarrier) {
    const Network a = oracle::random_net({3, 6, 2}, 1), b = oracle::random_net({3, 6, 2}, 2);
    const LabeledDataset data = random_regression(20, 3, 2, 3);
    const PathProfile prof = eval_path(linear_path(a, b), data, LossKind::squared, 10);
    ASSERT_EQ(prof.ts.size(), 11u);
    EXPECT_EQ(prof.ts.front(), 0.0);
    EXPECT_EQ(prof.ts.back(), 1.0);
    for (std::size_t k = 1; k < prof.ts.size(); ++k) EXPECT_LT(prof.ts[k - 1], prof.ts[k]);
    EXPECT_DOUBLE_EQ(prof.start_loss(), oracle::mean_squared(a, data));
    EXPECT_NEAR(prof.end_loss(), oracle::mean_squared(b, data), 1e-12);
    EXPECT_EQ(prof.max_loss, *std::max_element(prof.losses.begin(), prof.losses.end()));
    EXPECT_GE(prof.barrier, 0.0);

    const PathProfile flat = eval_path(PiecewisePath::starting_at(a), data, LossKind::squared, 10);
    EXPECT_EQ(flat.ts.size(), 2u);
    EXPECT_EQ(flat.barrier, 0.0);
    EXPECT_THROW(eval_path(linear_path(a, b), data, LossKind::squared, 0), ValidationError);
}

TEST(LiveUnits, FollowsBackwardReachability) {
    // Unit 1 of layer 1 feeds only unit 1 of layer 2, whose outgoing weight is zero.
    const Network net({Matrix(2, 2, {1, 0, 0, 1}), Matrix(2, 2, {1, 0, 0, 1}), Matrix(1, 2, {1, 0})});
    const auto live = live_units(net);
    EXPECT_EQ(live[0], (std::vector<bool>{true, false}));
    EXPECT_EQ(live[1], (std::vector<bool>{true, false}));
    EXPECT_EQ(free_counts(net), (std::vector<std::size_t>{1, 1}));
}
