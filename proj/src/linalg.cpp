#include "metasolve/linalg.hpp"
#include "metasolve/dense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace metasolve {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what)
{
    if (a != b) {
        std::ostringstream msg;
        msg << what << ": length mismatch (" << a << " vs " << b << ")";
        throw DimensionError(msg.str());
    }
}

}  // namespace

SparseMatrix::SparseMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets, std::vector<Index> col_indices,
                           std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values))
{
    if (nrows_ < 0 || ncols_ < 0) throw std::invalid_argument("SparseMatrix: negative dimension");
    if (static_cast<Index>(row_offsets_.size()) != nrows_ + 1)
        throw std::invalid_argument("SparseMatrix: row_offsets must have nrows+1 entries");
    if (row_offsets_.front() != 0) throw std::invalid_argument("SparseMatrix: row_offsets[0] must be 0");
    if (col_indices_.size() != values_.size() || row_offsets_.back() != static_cast<Index>(values_.size()))
        throw std::invalid_argument("SparseMatrix: row_offsets[nrows] must equal the number of stored entries");
    for (Index i = 0; i < nrows_; ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1]) throw std::invalid_argument("SparseMatrix: row_offsets decreasing");
        for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            const Index j = col_indices_[k];
            if (j < 0 || j >= ncols_) throw std::invalid_argument("SparseMatrix: column index out of range");
            if (k > row_offsets_[i] && col_indices_[k - 1] >= j)
                throw std::invalid_argument("SparseMatrix: column indices must be strictly increasing within a row");
            if (std::isnan(values_[k])) throw std::invalid_argument("SparseMatrix: NaN stored value");
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(Index nrows, Index ncols, std::vector<Triplet> triplets)
{
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Index> offsets(static_cast<std::size_t>(nrows + 1), 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    Index last_row = -1;
    Index last_col = -1;
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
            throw std::invalid_argument("SparseMatrix::from_triplets: index out of range");
        if (t.row == last_row && t.col == last_col) {
            vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        offsets[static_cast<std::size_t>(t.row + 1)] += 1;
        last_row = t.row;
        last_col = t.col;
    }
    for (Index i = 0; i < nrows; ++i) offsets[i + 1] += offsets[i];
    return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(Index n)
{
    std::vector<Index> offsets(static_cast<std::size_t>(n + 1));
    std::vector<Index> cols(static_cast<std::size_t>(n));
    for (Index i = 0; i <= n; ++i) offsets[i] = i;
    for (Index i = 0; i < n; ++i) cols[i] = i;
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

SparseMatrix SparseMatrix::from_dense(Index nrows, Index ncols, std::span<const double> row_major)
{
    require_same_length(row_major.size(), static_cast<std::size_t>(nrows * ncols), "SparseMatrix::from_dense");
    std::vector<Index> offsets(static_cast<std::size_t>(nrows + 1), 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index i = 0; i < nrows; ++i) {
        for (Index j = 0; j < ncols; ++j) {
            const double v = row_major[static_cast<std::size_t>(i * ncols + j)];
            if (v != 0.0) {
                cols.push_back(j);
                vals.push_back(v);
            }
        }
        offsets[i + 1] = static_cast<Index>(cols.size());
    }
    return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
}

double SparseMatrix::at(Index i, Index j) const
{
    const auto first = col_indices_.begin() + row_offsets_[i];
    const auto last = col_indices_.begin() + row_offsets_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

Vector SparseMatrix::diagonal() const
{
    Vector d(static_cast<std::size_t>(std::min(nrows_, ncols_)), 0.0);
    for (Index i = 0; i < static_cast<Index>(d.size()); ++i) d[i] = at(i, i);
    return d;
}

std::vector<double> SparseMatrix::to_dense() const
{
    std::vector<double> out(static_cast<std::size_t>(nrows_ * ncols_), 0.0);
    for (Index i = 0; i < nrows_; ++i)
        for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) out[i * ncols_ + col_indices_[k]] = values_[k];
    return out;
}

SparseMatrix SparseMatrix::scaled(double alpha) const
{
    std::vector<double> vals(values_);
    for (auto& v : vals) v *= alpha;
    return SparseMatrix(nrows_, ncols_, row_offsets_, col_indices_, std::move(vals));
}

std::size_t SparseMatrix::bytes() const
{
    return row_offsets_.size() * sizeof(Index) + col_indices_.size() * sizeof(Index) + values_.size() * sizeof(double);
}

SparseMatrix SparseMatrix::add(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("SparseMatrix::add: shape mismatch");
    std::vector<Index> offsets(static_cast<std::size_t>(a.rows() + 1), 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    for (Index i = 0; i < a.rows(); ++i) {
        Index ka = a.row_offsets_[i];
        Index kb = b.row_offsets_[i];
        const Index ea = a.row_offsets_[i + 1];
        const Index eb = b.row_offsets_[i + 1];
        while (ka < ea || kb < eb) {
            const Index ja = ka < ea ? a.col_indices_[ka] : a.cols();
            const Index jb = kb < eb ? b.col_indices_[kb] : b.cols();
            if (ja == jb) {
                cols.push_back(ja);
                vals.push_back(alpha * a.values_[ka++] + beta * b.values_[kb++]);
            } else if (ja < jb) {
                cols.push_back(ja);
                vals.push_back(alpha * a.values_[ka++]);
            } else {
                cols.push_back(jb);
                vals.push_back(beta * b.values_[kb++]);
            }
        }
        offsets[i + 1] = static_cast<Index>(cols.size());
    }
    return SparseMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y, CostCounter& counter)
{
    require_same_length(static_cast<std::size_t>(a.cols()), x.size(), "spmv");
    require_same_length(static_cast<std::size_t>(a.rows()), y.size(), "spmv (output)");
    const auto offsets = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (Index i = 0; i < a.rows(); ++i) {
        double sum = 0.0;
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k) sum += vals[k] * x[cols[k]];
        y[i] = sum;
    }
    counter.add_macs(static_cast<std::uint64_t>(a.nnz()));
}

Vector spmv(const SparseMatrix& a, std::span<const double> x, CostCounter& counter)
{
    require_same_length(static_cast<std::size_t>(a.cols()), x.size(), "spmv");
    Vector y(static_cast<std::size_t>(a.rows()));
    spmv(a, x, y, counter);
    return y;
}

void residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x, std::span<double> r,
              CostCounter& counter)
{
    require_same_length(b.size(), r.size(), "residual");
    spmv(a, x, r, counter);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    counter.add_macs(r.size());
}

double dot(std::span<const double> x, std::span<const double> y, CostCounter& counter)
{
    const double d = dot(x, y);
    counter.add_macs(x.size());
    return d;
}

double dot(std::span<const double> x, std::span<const double> y)
{
    require_same_length(x.size(), y.size(), "dot");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
    return sum;
}

void axpy(double a, std::span<const double> x, std::span<double> y, CostCounter& counter)
{
    require_same_length(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
    counter.add_macs(x.size());
}

double norm2(std::span<const double> x, CostCounter& counter)
{
    counter.add_macs(x.size());
    return norm2(x);
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void scale(double a, std::span<double> x, CostCounter& counter)
{
    for (auto& v : x) v *= a;
    counter.add_macs(x.size());
}

Vector dense_factor_solve(const SparseMatrix& a, std::span<const double> b, CostCounter& counter)
{
    if (!a.square()) throw DimensionError("dense_factor_solve: matrix must be square");
    require_same_length(static_cast<std::size_t>(a.rows()), b.size(), "dense_factor_solve");
    const LuFactorization lu(DenseMatrix::from_sparse(a), counter);
    Vector x(b.size());
    lu.solve(b, x, counter);
    return x;
}

Vector dense_factor_solve(const SparseMatrix& a, std::span<const double> b)
{
    CostCounter scratch;
    return dense_factor_solve(a, b, scratch);
}

void write_matrix(std::ostream& out, const SparseMatrix& a)
{
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    out << std::setprecision(17);
    const auto offsets = a.row_offsets();
    for (Index i = 0; i < a.rows(); ++i)
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k)
            out << i << ' ' << a.col_indices()[k] << ' ' << a.values()[k] << '\n';
}

void write_matrix(const std::string& path, const SparseMatrix& a)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_matrix(out, a);
    if (!out) throw std::runtime_error("write failed: " + path);
}

SparseMatrix read_matrix(std::istream& in)
{
    Index rows = 0, cols = 0, nnz = 0;
    if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
        throw std::runtime_error("matrix file: malformed header, expected `rows cols nnz`");
    std::vector<Index> offsets(static_cast<std::size_t>(rows + 1), 0);
    std::vector<Index> col_idx(static_cast<std::size_t>(nnz));
    std::vector<double> vals(static_cast<std::size_t>(nnz));
    Index prev_row = -1, prev_col = -1;
    for (Index k = 0; k < nnz; ++k) {
        Index i = 0, j = 0;
        double v = 0.0;
        if (!(in >> i >> j >> v)) throw std::runtime_error("matrix file: expected " + std::to_string(nnz) + " entries");
        if (i < 0 || i >= rows || j < 0 || j >= cols) throw std::runtime_error("matrix file: index out of range");
        if (i < prev_row || (i == prev_row && j <= prev_col))
            throw std::runtime_error("matrix file: entries must be sorted by (row, col) without duplicates");
        prev_row = i;
        prev_col = j;
        offsets[i + 1] += 1;
        col_idx[k] = j;
        vals[k] = v;
    }
    for (Index i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
    return SparseMatrix(rows, cols, std::move(offsets), std::move(col_idx), std::move(vals));
}

SparseMatrix read_matrix(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_matrix(in);
}

}  // namespace metasolve
