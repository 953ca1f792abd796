#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "modecon/error.hpp"
#include "modecon/rng.hpp"

namespace modecon {

using Vector = std::vector<double>;

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionError("matrix entries: expected " + std::to_string(rows_ * cols_) + ", got " +
                                 std::to_string(data_.size()));
        if (!all_finite(data_)) throw ValidationError("matrix entries must be finite");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool row_is_zero(std::size_t r) const {
        for (double x : row(r))
            if (x != 0.0) return false;
        return true;
    }

    bool col_is_zero(std::size_t c) const {
        for (std::size_t r = 0; r < rows_; ++r)
            if ((*this)(r, c) != 0.0) return false;
        return true;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline Vector matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size())
        throw DimensionError("matvec: matrix has " + std::to_string(a.cols()) + " columns, vector has " +
                             std::to_string(x.size()) + " entries");
    Vector y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) y[r] = dot(a.row(r), x);
    return y;
}

// Aᵀ y without forming the transpose.
inline Vector transpose_matvec(const Matrix& a, std::span<const double> y) {
    if (a.rows() != y.size()) throw DimensionError("transpose_matvec: dimension mismatch");
    Vector x(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double yr = y[r];
        if (yr == 0.0) continue;
        auto row = a.row(r);
        for (std::size_t c = 0; c < a.cols(); ++c) x[c] += row[c] * yr;
    }
    return x;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    return t;
}

inline double frobenius_norm(const Matrix& a) { return norm(a.data()); }

// (1 - t) a + t b, written so that t = 0 and t = 1 reproduce a and b bit for bit.
inline Matrix lerp(const Matrix& a, const Matrix& b, double t) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("lerp: shape mismatch");
    Matrix out(a.rows(), a.cols());
    auto pa = a.data();
    auto pb = b.data();
    auto po = out.data();
    const double s = 1.0 - t;
    for (std::size_t i = 0; i < po.size(); ++i) po[i] = s * pa[i] + t * pb[i];
    return out;
}

struct SpectralNorm {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Largest singular value by power iteration on AᵀA, stopping once the estimate changes by
// less than tol relative to itself. The start vector is a fixed pseudo-random unit vector.
inline SpectralNorm spectral_norm(const Matrix& a, double tol = 1e-10, std::size_t max_iter = 10000) {
    if (!(tol > 0.0)) throw ValidationError("spectral_norm: tol must be positive");
    if (!all_finite(a.data())) throw NumericError("spectral_norm: non-finite matrix entry");
    if (a.rows() == 0 || a.cols() == 0) return {0.0, 0, true};

    Rng rng(0x5eed5eed5eedULL);
    Vector v(a.cols());
    for (double& x : v) x = rng.normal();
    double nv = norm(v);
    for (double& x : v) x /= nv;

    double sigma = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        Vector w = transpose_matvec(a, matvec(a, v));
        const double lambda = dot(v, w);
        const double next = std::sqrt(std::max(lambda, 0.0));
        const double nw = norm(w);
        if (nw == 0.0) return {0.0, it, true};
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
        if (it > 1 && std::abs(next - sigma) <= tol * next) return {next, it, true};
        sigma = next;
    }
    return {sigma, max_iter, false};
}

}  // namespace modecon
