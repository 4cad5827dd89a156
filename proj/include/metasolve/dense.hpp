#pragma once

#include "metasolve/linalg.hpp"

#include <span>
#include <vector>

namespace metasolve {

/// Column-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index rows, Index cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill)
    {
    }

    static DenseMatrix from_sparse(const SparseMatrix& a);
    static DenseMatrix identity(Index n);

    [[nodiscard]] Index rows() const { return rows_; }
    [[nodiscard]] Index cols() const { return cols_; }

    double& operator()(Index i, Index j) { return data_[static_cast<std::size_t>(j * rows_ + i)]; }
    double operator()(Index i, Index j) const { return data_[static_cast<std::size_t>(j * rows_ + i)]; }

    [[nodiscard]] std::span<double> column(Index j) { return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)}; }
    [[nodiscard]] std::span<const double> column(Index j) const
    {
        return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
    }
    [[nodiscard]] std::span<const double> data() const { return data_; }
    [[nodiscard]] std::span<double> data() { return data_; }
    [[nodiscard]] std::size_t bytes() const { return data_.size() * sizeof(double); }

    [[nodiscard]] DenseMatrix transpose() const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

/// y = P x (P is n x m, x has length m). Adds n*m MACs.
void dense_multiply(const DenseMatrix& p, std::span<const double> x, std::span<double> y, CostCounter& counter);
/// y = P^T x. Adds n*m MACs.
void dense_multiply_transpose(const DenseMatrix& p, std::span<const double> x, std::span<double> y,
                              CostCounter& counter);

/// Partially pivoted LU factorization, P A = L U, stored in place.
class LuFactorization {
public:
    LuFactorization() = default;
    /// Throws SingularMatrixError when |pivot| < 1e-14 * max |pivot|.
    explicit LuFactorization(DenseMatrix a);
    LuFactorization(DenseMatrix a, CostCounter& counter);

    [[nodiscard]] Index size() const { return lu_.rows(); }
    /// Adds n^2 MACs.
    void solve(std::span<const double> b, std::span<double> x, CostCounter& counter) const;
    [[nodiscard]] Vector solve(std::span<const double> b) const;
    [[nodiscard]] std::size_t bytes() const { return lu_.bytes() + pivots_.size() * sizeof(Index); }

    /// MACs charged by factorizing an n x n matrix.
    static std::uint64_t factor_macs(Index n);

private:
    void factor(CostCounter& counter);

    DenseMatrix lu_;
    std::vector<Index> pivots_;
};

/// Lower Cholesky factor A = L L^T of a symmetric positive definite matrix.
class CholeskyFactorization {
public:
    /// Throws NumericalError when a non-positive pivot is met.
    explicit CholeskyFactorization(DenseMatrix a);

    [[nodiscard]] Index size() const { return l_.rows(); }
    [[nodiscard]] const DenseMatrix& lower() const { return l_; }
    /// y = L x
    void multiply_lower(std::span<const double> x, std::span<double> y) const;

private:
    DenseMatrix l_;
};

/// Thin Householder QR; returns the n x m matrix Q with orthonormal columns spanning A.
DenseMatrix thin_q(const DenseMatrix& a);

/// Smallest and largest singular values of a tall matrix.
struct SingularValueBounds {
    double smallest;
    double largest;
};
SingularValueBounds singular_value_bounds(const DenseMatrix& a);

}  // namespace metasolve
