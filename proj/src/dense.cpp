#include "metasolve/dense.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace metasolve {

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& a)
{
    DenseMatrix d(a.rows(), a.cols());
    const auto offsets = a.row_offsets();
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k) d(i, a.col_indices()[k]) = a.values()[k];
    return d;
}

DenseMatrix DenseMatrix::identity(Index n)
{
    DenseMatrix d(n, n);
    for (Index i = 0; i < n; ++i) d(i, i) = 1.0;
    return d;
}

DenseMatrix DenseMatrix::transpose() const
{
    DenseMatrix t(cols_, rows_);
    for (Index j = 0; j < cols_; ++j)
        for (Index i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
}

void dense_multiply(const DenseMatrix& p, std::span<const double> x, std::span<double> y, CostCounter& counter)
{
    if (static_cast<Index>(x.size()) != p.cols() || static_cast<Index>(y.size()) != p.rows())
        throw DimensionError("dense_multiply: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (Index j = 0; j < p.cols(); ++j) {
        const auto col = p.column(j);
        const double xj = x[j];
        for (Index i = 0; i < p.rows(); ++i) y[i] += col[i] * xj;
    }
    counter.add_macs(static_cast<std::uint64_t>(p.rows() * p.cols()));
}

void dense_multiply_transpose(const DenseMatrix& p, std::span<const double> x, std::span<double> y,
                              CostCounter& counter)
{
    if (static_cast<Index>(x.size()) != p.rows() || static_cast<Index>(y.size()) != p.cols())
        throw DimensionError("dense_multiply_transpose: dimension mismatch");
    for (Index j = 0; j < p.cols(); ++j) {
        const auto col = p.column(j);
        double sum = 0.0;
        for (Index i = 0; i < p.rows(); ++i) sum += col[i] * x[i];
        y[j] = sum;
    }
    counter.add_macs(static_cast<std::uint64_t>(p.rows() * p.cols()));
}

LuFactorization::LuFactorization(DenseMatrix a) : lu_(std::move(a))
{
    CostCounter scratch;
    factor(scratch);
}

LuFactorization::LuFactorization(DenseMatrix a, CostCounter& counter) : lu_(std::move(a)) { factor(counter); }

std::uint64_t LuFactorization::factor_macs(Index n)
{
    // sum over m = 0..n-1 of (m multipliers + m^2 updates)
    const auto m = static_cast<std::uint64_t>(n);
    if (m == 0) return 0;
    return (m - 1) * m / 2 + (m - 1) * m * (2 * m - 1) / 6;
}

void LuFactorization::factor(CostCounter& counter)
{
    if (lu_.rows() != lu_.cols()) throw DimensionError("LuFactorization: matrix must be square");
    const Index n = lu_.rows();
    pivots_.assign(static_cast<std::size_t>(n), 0);
    double max_pivot = 0.0;
    for (Index k = 0; k < n; ++k) {
        Index p = k;
        double best = std::abs(lu_(k, k));
        for (Index i = k + 1; i < n; ++i) {
            if (std::abs(lu_(i, k)) > best) {
                best = std::abs(lu_(i, k));
                p = i;
            }
        }
        pivots_[k] = p;
        if (best == 0.0) throw SingularMatrixError("LuFactorization: exactly zero pivot at column " + std::to_string(k));
        max_pivot = std::max(max_pivot, best);
        if (p != k)
            for (Index j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        const double inv = 1.0 / lu_(k, k);
        for (Index i = k + 1; i < n; ++i) lu_(i, k) *= inv;
        for (Index j = k + 1; j < n; ++j) {
            const double ukj = lu_(k, j);
            if (ukj == 0.0) continue;
            for (Index i = k + 1; i < n; ++i) lu_(i, j) -= lu_(i, k) * ukj;
        }
    }
    counter.add_macs(factor_macs(n));
    for (Index k = 0; k < n; ++k) {
        if (std::abs(lu_(k, k)) < 1e-14 * max_pivot) {
            std::ostringstream msg;
            msg << "LuFactorization: numerically singular, pivot " << std::abs(lu_(k, k)) << " at column " << k
                << " vs largest pivot " << max_pivot;
            throw SingularMatrixError(msg.str());
        }
    }
}

void LuFactorization::solve(std::span<const double> b, std::span<double> x, CostCounter& counter) const
{
    const Index n = lu_.rows();
    if (static_cast<Index>(b.size()) != n || static_cast<Index>(x.size()) != n)
        throw DimensionError("LuFactorization::solve: dimension mismatch");
    if (x.data() != b.data()) std::copy(b.begin(), b.end(), x.begin());
    for (Index k = 0; k < n; ++k)
        if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
    // L y = Pb, unit diagonal, column-oriented
    for (Index j = 0; j < n; ++j) {
        const double xj = x[j];
        for (Index i = j + 1; i < n; ++i) x[i] -= lu_(i, j) * xj;
    }
    for (Index j = n - 1; j >= 0; --j) {
        x[j] /= lu_(j, j);
        const double xj = x[j];
        for (Index i = 0; i < j; ++i) x[i] -= lu_(i, j) * xj;
    }
    counter.add_macs(static_cast<std::uint64_t>(n * n));
}

Vector LuFactorization::solve(std::span<const double> b) const
{
    Vector x(b.size());
    CostCounter scratch;
    solve(b, x, scratch);
    return x;
}

CholeskyFactorization::CholeskyFactorization(DenseMatrix a) : l_(std::move(a))
{
    if (l_.rows() != l_.cols()) throw DimensionError("CholeskyFactorization: matrix must be square");
    const Index n = l_.rows();
    for (Index j = 0; j < n; ++j) {
        double d = l_(j, j);
        for (Index k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
        if (!(d > 0.0))
            throw NumericalError("CholeskyFactorization: non-positive pivot at column " + std::to_string(j));
        const double ljj = std::sqrt(d);
        l_(j, j) = ljj;
        for (Index k = 0; k < j; ++k) {
            const double ljk = l_(j, k);
            if (ljk == 0.0) continue;
            for (Index i = j + 1; i < n; ++i) l_(i, j) -= l_(i, k) * ljk;
        }
        for (Index i = j + 1; i < n; ++i) l_(i, j) /= ljj;
        for (Index i = 0; i < j; ++i) l_(i, j) = 0.0;
    }
}

void CholeskyFactorization::multiply_lower(std::span<const double> x, std::span<double> y) const
{
    const Index n = l_.rows();
    if (static_cast<Index>(x.size()) != n || static_cast<Index>(y.size()) != n)
        throw DimensionError("CholeskyFactorization::multiply_lower: dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
        const double xj = x[j];
        for (Index i = j; i < n; ++i) y[i] += l_(i, j) * xj;
    }
}

DenseMatrix thin_q(const DenseMatrix& a)
{
    const Index n = a.rows();
    const Index m = a.cols();
    if (m > n) throw DimensionError("thin_q: more columns than rows");
    DenseMatrix r = a;
    std::vector<Vector> reflectors;
    reflectors.reserve(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k) {
        Vector v(static_cast<std::size_t>(n - k));
        for (Index i = k; i < n; ++i) v[i - k] = r(i, k);
        const double alpha = norm2(v);
        if (alpha == 0.0) {
            reflectors.emplace_back();
            continue;
        }
        v[0] += v[0] >= 0.0 ? alpha : -alpha;
        const double vnorm = norm2(v);
        for (auto& x : v) x /= vnorm;
        for (Index j = k; j < m; ++j) {
            double s = 0.0;
            for (Index i = k; i < n; ++i) s += v[i - k] * r(i, j);
            for (Index i = k; i < n; ++i) r(i, j) -= 2.0 * s * v[i - k];
        }
        reflectors.push_back(std::move(v));
    }
    DenseMatrix q(n, m);
    for (Index j = 0; j < m; ++j) q(j, j) = 1.0;
    for (Index k = m - 1; k >= 0; --k) {
        const auto& v = reflectors[k];
        if (v.empty()) continue;
        for (Index j = 0; j < m; ++j) {
            double s = 0.0;
            for (Index i = k; i < n; ++i) s += v[i - k] * q(i, j);
            for (Index i = k; i < n; ++i) q(i, j) -= 2.0 * s * v[i - k];
        }
    }
    return q;
}

SingularValueBounds singular_value_bounds(const DenseMatrix& a)
{
    if (a.rows() == 0 || a.cols() == 0) return {0.0, 0.0};
    const Eigen::Map<const Eigen::MatrixXd> view(a.data().data(), a.rows(), a.cols());
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(view);
    const auto& s = svd.singularValues();
    return {s.minCoeff(), s.maxCoeff()};
}

}  // namespace metasolve
