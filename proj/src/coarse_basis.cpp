#include "metasolve/coarse_basis.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace metasolve {

ProlongationBasis::ProlongationBasis(DenseMatrix p, BasisKind kind, std::string source)
    : p_(std::move(p)), kind_(kind), source_(std::move(source))
{
    if (p_.cols() < 1) throw std::invalid_argument("ProlongationBasis: need at least one column");
    if (p_.cols() >= p_.rows()) {
        std::ostringstream msg;
        msg << "ProlongationBasis: coarse size " << p_.cols() << " must be smaller than fine size " << p_.rows();
        throw DimensionError(msg.str());
    }
    for (const double v : p_.data())
        if (!std::isfinite(v)) throw std::invalid_argument("ProlongationBasis: non-finite entry");
    sigma_min_ = singular_value_bounds(p_).smallest;
    if (!(sigma_min_ > kRankTolerance)) {
        std::ostringstream msg;
        msg << "ProlongationBasis: rank deficient, smallest singular value " << sigma_min_ << " <= " << kRankTolerance;
        throw RankError(msg.str(), sigma_min_);
    }
}

SparseMatrix ProlongationBasis::to_sparse() const
{
    std::vector<Triplet> t;
    for (Index j = 0; j < p_.cols(); ++j)
        for (Index i = 0; i < p_.rows(); ++i)
            if (p_(i, j) != 0.0) t.push_back({i, j, p_(i, j)});
    return SparseMatrix::from_triplets(p_.rows(), p_.cols(), std::move(t));
}

ProlongationBasis load_basis(const std::string& path, Index expected_rows)
{
    const SparseMatrix m = read_matrix(path);
    if (expected_rows >= 0 && m.rows() != expected_rows) {
        std::ostringstream msg;
        msg << "load_basis: " << path << " has " << m.rows() << " rows, expected " << expected_rows;
        throw DimensionError(msg.str());
    }
    return ProlongationBasis(DenseMatrix::from_sparse(m), BasisKind::FromFile, path);
}

void save_basis(const std::string& path, const ProlongationBasis& basis) { write_matrix(path, basis.to_sparse()); }

DenseMatrix bilinear_interpolation(const StructuredMesh& fine, Index coarse_n)
{
    const Index fine_n = fine.n();
    if (coarse_n < 2 || coarse_n >= fine_n)
        throw std::invalid_argument("geometric basis: need 2 <= coarse_n < fine_n");
    if ((fine_n - 1) % (coarse_n - 1) != 0) {
        std::ostringstream msg;
        msg << "geometric basis: fine intervals " << fine_n - 1 << " not divisible by coarse intervals " << coarse_n - 1;
        throw std::invalid_argument(msg.str());
    }
    const Index ratio = (fine_n - 1) / (coarse_n - 1);
    DenseMatrix p(fine_n * fine_n, coarse_n * coarse_n);
    auto locate = [&](Index i, Index& cell, double& t) {
        cell = i / ratio;
        t = static_cast<double>(i % ratio) / static_cast<double>(ratio);
        if (cell == coarse_n - 1) {
            cell = coarse_n - 2;
            t = 1.0;
        }
    };
    for (Index j = 0; j < fine_n; ++j) {
        Index cj = 0;
        double ty = 0.0;
        locate(j, cj, ty);
        for (Index i = 0; i < fine_n; ++i) {
            Index ci = 0;
            double tx = 0.0;
            locate(i, ci, tx);
            const Index row = fine.node(i, j);
            const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
            const Index c[4] = {cj * coarse_n + ci, cj * coarse_n + ci + 1, (cj + 1) * coarse_n + ci,
                                (cj + 1) * coarse_n + ci + 1};
            for (int q = 0; q < 4; ++q)
                if (w[q] != 0.0) p(row, c[q]) += w[q];
        }
    }
    return p;
}

ProlongationBasis geometric_basis(const StructuredMesh& fine, Index coarse_n)
{
    const DenseMatrix full = bilinear_interpolation(fine, coarse_n);
    const StructuredMesh coarse(coarse_n);
    if (coarse.interior_count() == 0)
        throw std::invalid_argument("geometric basis: coarse grid with n=" + std::to_string(coarse_n) +
                                    " has no interior nodes (degenerate coarse space)");
    DenseMatrix p(fine.interior_count(), coarse.interior_count());
    for (Index jc = 0; jc < coarse.interior_count(); ++jc) {
        const Index cnode = coarse.interior_nodes()[jc];
        for (Index r = 0; r < fine.interior_count(); ++r) p(r, jc) = full(fine.interior_nodes()[r], cnode);
    }
    std::ostringstream src;
    src << "geometric bilinear " << fine.n() << "->" << coarse_n;
    return ProlongationBasis(std::move(p), BasisKind::Geometric, src.str());
}

ProlongationBasis orthonormalize(const ProlongationBasis& basis)
{
    return ProlongationBasis(thin_q(basis.matrix()), basis.kind(), basis.source() + " (orthonormalized)");
}

ProlongationBasis random_smoothed_qr_basis(const SparseMatrix& a, Index n_coarse, int smoothing_sweeps,
                                           std::uint64_t seed)
{
    const Index n = a.rows();
    if (n_coarse < 1 || n_coarse >= n) throw std::invalid_argument("random_smoothed_qr_basis: need 1 <= n_coarse < n_fine");
    const Vector diag = a.diagonal();
    for (const double d : diag)
        if (d == 0.0) throw std::invalid_argument("random_smoothed_qr_basis: zero diagonal entry");
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        std::mt19937_64 rng(s);
        std::normal_distribution<double> normal;
        DenseMatrix p(n, n_coarse);
        for (auto& v : p.data()) v = normal(rng);
        CostCounter scratch;
        Vector ax(static_cast<std::size_t>(n));
        for (Index j = 0; j < n_coarse; ++j) {
            auto col = p.column(j);
            for (int sweep = 0; sweep < smoothing_sweeps; ++sweep) {
                spmv(a, col, ax, scratch);
                for (Index i = 0; i < n; ++i) col[i] -= (2.0 / 3.0) * ax[i] / diag[i];
            }
            const double nrm = norm2(col);
            if (nrm > 0.0)
                for (auto& v : col) v /= nrm;
        }
        if (!(singular_value_bounds(p).smallest > kRankTolerance)) continue;
        std::ostringstream src;
        src << "random smoothed QR (sweeps=" << smoothing_sweeps << ", seed=" << s << ")";
        return ProlongationBasis(thin_q(p), BasisKind::RandomSmoothedQR, src.str());
    }
    throw RankError("random_smoothed_qr_basis: rank collapse after smoothing (retried once)", 0.0);
}

std::vector<Index> geometric_coarse_chain(Index fine_n, int extra_levels)
{
    std::vector<Index> chain;
    Index intervals = fine_n - 1;
    for (int level = 0; level < extra_levels; ++level) {
        Index factor = 2;
        while (factor <= intervals && intervals % factor != 0) ++factor;
        if (intervals < 2 || factor > intervals) throw std::invalid_argument("geometric chain: cannot coarsen further");
        intervals /= factor;
        if (intervals < 2)
            throw std::invalid_argument("geometric chain: level " + std::to_string(level + 2) +
                                        " would have no interior nodes");
        chain.push_back(intervals + 1);
    }
    return chain;
}

}  // namespace metasolve
