#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "modecon/linalg.hpp"
#include "modecon/rng.hpp"
#include "support/oracles.hpp"

using namespace modecon;

TEST(Matrix, ConstructorValidatesSizeAndFiniteness) {
    EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionError);
    EXPECT_THROW(Matrix(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()}), ValidationError);
    const Matrix m(2, 3, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(m(1, 0), 4.0);
    EXPECT_EQ(m.row(1)[2], 6.0);
}

TEST(Matrix, RowAndColumnZeroChecks) {
    Matrix m(2, 2, {0, 1, 0, 0});
    EXPECT_TRUE(m.row_is_zero(1));
    EXPECT_FALSE(m.row_is_zero(0));
    EXPECT_TRUE(m.col_is_zero(0));
    EXPECT_FALSE(m.col_is_zero(1));
}

TEST(Linalg, HandProducts) {
    const Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(matvec(a, Vector{1, 0, -1}), (Vector{-2, -2}));
    EXPECT_EQ(transpose_matvec(a, Vector{1, 1}), (Vector{5, 7, 9}));
    const Matrix b(3, 2, {1, 0, 0, 1, 1, 1});
    EXPECT_EQ(matmul(a, b), Matrix(2, 2, {4, 5, 10, 11}));
    EXPECT_EQ(transpose(a), Matrix(3, 2, {1, 4, 2, 5, 3, 6}));
    EXPECT_DOUBLE_EQ(frobenius_norm(Matrix(1, 2, {3, 4})), 5.0);
    EXPECT_THROW(matvec(a, Vector{1, 2}), DimensionError);
    EXPECT_THROW(matmul(a, a), DimensionError);
}

TEST(Linalg, LerpIsExactAtEndpoints) {
    std::mt19937_64 gen(3);
    const Matrix a = oracle::random_matrix(4, 5, gen), b = oracle::random_matrix(4, 5, gen);
    EXPECT_EQ(lerp(a, b, 0.0), a);
    EXPECT_EQ(lerp(a, b, 1.0), b);
    const Matrix mid = lerp(a, b, 0.5);
    EXPECT_NEAR(mid(2, 3), 0.5 * (a(2, 3) + b(2, 3)), 1e-15);
}

TEST(SpectralNorm, HandValues) {
    EXPECT_NEAR(spectral_norm(Matrix::diagonal(std::vector<double>{3, -7, 2})).value, 7.0, 1e-10);
    EXPECT_NEAR(spectral_norm(Matrix(1, 2, {3, 4})).value, 5.0, 1e-12);
    const SpectralNorm z = spectral_norm(Matrix(3, 2));
    EXPECT_EQ(z.value, 0.0);
}

TEST(SpectralNorm, MatchesJacobiOracle) {
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<std::size_t> size(1, 30);
    for (int k = 0; k < 40; ++k) {
        const Matrix m = oracle::random_matrix(size(gen), size(gen), gen);
        const double ref = oracle::spectral_norm(m);
        const SpectralNorm s = spectral_norm(m);
        EXPECT_TRUE(s.converged);
        EXPECT_NEAR(s.value, ref, 1e-6 * ref);
    }
}

TEST(SpectralNorm, RankOneUsesTheOuterProductNorm) {
    const Vector u{1, 2, 2}, v{3, 4};
    Matrix m(3, 2);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c) m(r, c) = u[r] * v[c];
    EXPECT_NEAR(spectral_norm(m).value, 15.0, 1e-9);
}

TEST(Rng, DeterministicStreams) {
    Rng a(42), b(42);
    for (int k = 0; k < 10; ++k) EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

TEST(Rng, SampleWithoutReplacementIsSortedAndDistinct) {
    Rng r(5);
    const auto s = r.sample_without_replacement(20, 7);
    ASSERT_EQ(s.size(), 7u);
    for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(s[k - 1], s[k]);
    EXPECT_LT(s.back(), 20u);
}
