#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace metasolve {

using Vector = std::vector<double>;
using Index = std::int64_t;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation and memory tally owned by a single solver run.
///
/// MAC convention (used by every kernel in the library):
///   - spmv: one MAC per stored nonzero
///   - dot, axpy, norm2, scale, and other length-n vector updates: one MAC per element
///   - dense factorizations and triangular solves: one MAC per scalar multiply-add
/// Scalar bookkeeping of size O(restart^2) or smaller is not counted.
///
/// Memory is explicit byte accounting of matrices and vectors registered by the
/// run, not process-level measurement.
class CostCounter {
public:
    void add_macs(std::uint64_t n) { macs_ += n; }

    void allocate(std::size_t bytes)
    {
        current_bytes_ += bytes;
        if (current_bytes_ > peak_bytes_) peak_bytes_ = current_bytes_;
    }

    void release(std::size_t bytes) { current_bytes_ = bytes > current_bytes_ ? 0 : current_bytes_ - bytes; }

    [[nodiscard]] std::uint64_t macs() const { return macs_; }
    [[nodiscard]] std::size_t current_bytes() const { return current_bytes_; }
    [[nodiscard]] std::size_t peak_bytes() const { return peak_bytes_; }

private:
    std::uint64_t macs_ = 0;
    std::size_t current_bytes_ = 0;
    std::size_t peak_bytes_ = 0;
};

/// RAII registration of a block of bytes with a CostCounter.
class ScopedBytes {
public:
    ScopedBytes(CostCounter& counter, std::size_t bytes) : counter_(&counter), bytes_(bytes) { counter_->allocate(bytes_); }
    ~ScopedBytes()
    {
        if (counter_) counter_->release(bytes_);
    }
    ScopedBytes(const ScopedBytes&) = delete;
    ScopedBytes& operator=(const ScopedBytes&) = delete;
    ScopedBytes(ScopedBytes&& other) noexcept : counter_(other.counter_), bytes_(other.bytes_) { other.counter_ = nullptr; }
    ScopedBytes& operator=(ScopedBytes&&) = delete;

private:
    CostCounter* counter_;
    std::size_t bytes_;
};

inline std::size_t vector_bytes(std::size_t n) { return n * sizeof(double); }

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Compressed-row sparse matrix. Immutable after construction.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Validates the CSR invariants; throws std::invalid_argument on violation.
    SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets, std::vector<Index> col_indices,
                 std::vector<double> values);

    /// Duplicate (row, col) entries are summed. Explicit zeros are kept.
    static SparseMatrix from_triplets(Index nrows, Index ncols, std::vector<Triplet> triplets);
    static SparseMatrix identity(Index n);
    /// Stores every entry of a row-major dense block whose value is nonzero.
    static SparseMatrix from_dense(Index nrows, Index ncols, std::span<const double> row_major);

    [[nodiscard]] Index rows() const { return nrows_; }
    [[nodiscard]] Index cols() const { return ncols_; }
    [[nodiscard]] Index nnz() const { return static_cast<Index>(values_.size()); }
    [[nodiscard]] bool square() const { return nrows_ == ncols_; }

    [[nodiscard]] std::span<const Index> row_offsets() const { return row_offsets_; }
    [[nodiscard]] std::span<const Index> col_indices() const { return col_indices_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    /// Stored value at (i, j), zero if not stored.
    [[nodiscard]] double at(Index i, Index j) const;
    [[nodiscard]] Vector diagonal() const;
    /// Row-major dense copy.
    [[nodiscard]] std::vector<double> to_dense() const;
    [[nodiscard]] SparseMatrix scaled(double alpha) const;
    [[nodiscard]] std::size_t bytes() const;

    /// alpha*A + beta*B for matrices of equal shape; result pattern is the union.
    static SparseMatrix add(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);

private:
    Index nrows_ = 0;
    Index ncols_ = 0;
    std::vector<Index> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

/// y = A x. Adds nnz(A) MACs.
Vector spmv(const SparseMatrix& a, std::span<const double> x, CostCounter& counter);
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y, CostCounter& counter);

/// r = b - A x. Adds nnz(A) + n MACs.
void residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x, std::span<double> r,
              CostCounter& counter);

double dot(std::span<const double> x, std::span<const double> y, CostCounter& counter);
/// y <- a x + y
void axpy(double a, std::span<const double> x, std::span<double> y, CostCounter& counter);
double norm2(std::span<const double> x, CostCounter& counter);
/// x <- a x
void scale(double a, std::span<double> x, CostCounter& counter);

/// Uncounted conveniences for setup code and tests.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

/// Solves A x = b through a partially pivoted LU of the densified matrix.
/// Throws SingularMatrixError when a pivot falls below 1e-14 times the largest pivot.
Vector dense_factor_solve(const SparseMatrix& a, std::span<const double> b);
Vector dense_factor_solve(const SparseMatrix& a, std::span<const double> b, CostCounter& counter);

/// Matrix text format: header `rows cols nnz`, then `row col value` lines,
/// zero-based, sorted by (row, col).
void write_matrix(std::ostream& out, const SparseMatrix& a);
void write_matrix(const std::string& path, const SparseMatrix& a);
SparseMatrix read_matrix(std::istream& in);
SparseMatrix read_matrix(const std::string& path);

}  // namespace metasolve
