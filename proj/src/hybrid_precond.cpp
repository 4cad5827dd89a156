#include "metasolve/hybrid_precond.hpp"

#include <algorithm>
#include <sstream>

namespace metasolve {

void IdentityPreconditioner::apply(std::span<const double> r, std::span<double> z, CostCounter&) const
{
    if (static_cast<Index>(r.size()) != n_ || z.size() != r.size())
        throw DimensionError("IdentityPreconditioner: dimension mismatch");
    std::copy(r.begin(), r.end(), z.begin());
}

DirectPreconditioner::DirectPreconditioner(const SparseMatrix& a) : lu_(DenseMatrix::from_sparse(a)) {}

DirectPreconditioner::DirectPreconditioner(const SparseMatrix& a, CostCounter& setup_counter)
    : lu_(DenseMatrix::from_sparse(a), setup_counter)
{
}

void DirectPreconditioner::apply(std::span<const double> r, std::span<double> z, CostCounter& counter) const
{
    lu_.solve(r, z, counter);
}

SmoothingStrategy SmoothingStrategy::parse(const std::string& text)
{
    SmoothingStrategy s;
    char dash1 = 0, dash2 = 0;
    int middle = 0;
    std::istringstream in(text);
    if (!(in >> s.pre >> dash1 >> middle >> dash2 >> s.post) || dash1 != '-' || dash2 != '-' || middle != 1 ||
        s.pre < 0 || s.post < 0 || !(in >> std::ws).eof())
        throw std::invalid_argument("strategy must look like \"s-1-s\" with s >= 0, got \"" + text + "\"");
    return s;
}

std::string SmoothingStrategy::str() const { return std::to_string(pre) + "-1-" + std::to_string(post); }

HybridPreconditioner::HybridPreconditioner(std::vector<Level> levels, std::optional<LuFactorization> coarse_solver,
                                           std::optional<SparseMatrix> coarse_operator, SmoothingStrategy strategy)
    : levels_(std::move(levels)),
      coarse_solver_(std::move(coarse_solver)),
      coarse_operator_(std::move(coarse_operator)),
      strategy_(strategy)
{
    if (levels_.empty()) throw std::invalid_argument("HybridPreconditioner: no levels");
    for (std::size_t d = 0; d < levels_.size(); ++d) {
        const auto& lvl = levels_[d];
        const bool last = d + 1 == levels_.size();
        if (lvl.basis) {
            if (lvl.basis->fine_size() != lvl.a.rows()) throw DimensionError("HybridPreconditioner: basis rows != level size");
            const Index next = last ? (coarse_solver_ ? coarse_solver_->size() : -1) : levels_[d + 1].a.rows();
            if (lvl.basis->coarse_size() != next)
                throw DimensionError("HybridPreconditioner: basis columns do not match the next level");
        } else if (!last || coarse_solver_) {
            throw std::invalid_argument("HybridPreconditioner: only a single smoothing-only level may lack a basis");
        }
    }
}

void HybridPreconditioner::apply(std::span<const double> r, std::span<double> z, CostCounter& counter) const
{
    if (static_cast<Index>(r.size()) != size() || z.size() != r.size())
        throw DimensionError("HybridPreconditioner::apply: dimension mismatch");
    sandwich(0, r, z, counter);
}

void HybridPreconditioner::sandwich(std::size_t depth, std::span<const double> r, std::span<double> z,
                                    CostCounter& counter) const
{
    const Level& lvl = levels_[depth];
    std::fill(z.begin(), z.end(), 0.0);
    lvl.smoother.apply(lvl.a, r, z, strategy_.pre, counter);
    if (lvl.basis) {
        const DenseMatrix& p = lvl.basis->matrix();
        Vector rs(r.size());
        residual(lvl.a, r, z, rs, counter);
        Vector rc(static_cast<std::size_t>(p.cols()));
        dense_multiply_transpose(p, rs, rc, counter);
        Vector zc(rc.size());
        coarse_correct(depth + 1, rc, zc, counter);
        dense_multiply(p, zc, rs, counter);
        axpy(1.0, rs, z, counter);
    }
    lvl.smoother.apply(lvl.a, r, z, strategy_.post, counter);
}

void HybridPreconditioner::coarse_correct(std::size_t depth, std::span<const double> r, std::span<double> z,
                                          CostCounter& counter) const
{
    if (depth < levels_.size())
        sandwich(depth, r, z, counter);
    else
        coarse_solver_->solve(r, z, counter);
}

std::string HybridPreconditioner::describe() const
{
    std::ostringstream out;
    out << "hybrid(levels=" << level_count() << ", smoother=" << levels_.front().smoother.kind().name()
        << ", strategy=" << strategy_.str() << ", sizes=";
    for (const auto& lvl : levels_) out << lvl.a.rows() << "->";
    if (coarse_solver_)
        out << coarse_solver_->size();
    else
        out << "none";
    out << ")";
    return out.str();
}

std::size_t HybridPreconditioner::bytes() const
{
    std::size_t total = 0;
    for (const auto& lvl : levels_) {
        total += lvl.a.bytes();
        if (lvl.basis) total += lvl.basis->matrix().bytes();
    }
    if (coarse_operator_) total += coarse_operator_->bytes();
    if (coarse_solver_) total += coarse_solver_->bytes();
    return total;
}

std::vector<LevelShape> HybridPreconditioner::shape() const
{
    std::vector<LevelShape> out;
    for (const auto& lvl : levels_)
        out.push_back({lvl.a.rows(), lvl.a.nnz(), lvl.basis ? lvl.basis->coarse_size() : 0, lvl.smoother.kind().type});
    if (coarse_solver_) out.push_back({coarse_solver_->size(), coarse_operator_ ? coarse_operator_->nnz() : 0, 0,
                                       levels_.back().smoother.kind().type});
    return out;
}

SparseMatrix galerkin_product(const SparseMatrix& a, const DenseMatrix& p, CostCounter& counter)
{
    if (!a.square() || a.rows() != p.rows()) throw DimensionError("galerkin_product: dimension mismatch");
    const Index n = p.rows();
    const Index m = p.cols();
    DenseMatrix ap(n, m);
    for (Index j = 0; j < m; ++j) spmv(a, p.column(j), ap.column(j), counter);
    std::vector<double> coarse(static_cast<std::size_t>(m * m));
    for (Index i = 0; i < m; ++i) {
        const auto pi = p.column(i);
        for (Index j = 0; j < m; ++j) {
            const auto apj = ap.column(j);
            double s = 0.0;
            for (Index k = 0; k < n; ++k) s += pi[k] * apj[k];
            coarse[static_cast<std::size_t>(i * m + j)] = s;
        }
    }
    counter.add_macs(static_cast<std::uint64_t>(n * m * m));
    return SparseMatrix::from_dense(m, m, coarse);
}

HybridPreconditioner build_hybrid(const SparseMatrix& a, const HybridOptions& options, const BasisProvider& bases,
                                  CostCounter& setup_counter)
{
    if (options.levels < 1 || options.levels > 3) throw std::invalid_argument("build_hybrid: levels must be 1, 2 or 3");
    if (!a.square()) throw DimensionError("build_hybrid: matrix must be square");
    std::vector<HybridPreconditioner::Level> levels;
    SparseMatrix current = a;
    for (int depth = 0; depth + 1 < options.levels; ++depth) {
        ProlongationBasis basis = bases(depth, current);
        if (basis.fine_size() != current.rows()) {
            std::ostringstream msg;
            msg << "build_hybrid: basis for level " << depth + 1 << " has " << basis.fine_size() << " rows, operator has "
                << current.rows();
            throw DimensionError(msg.str());
        }
        if (basis.coarse_size() > kMaxCoarseSize)
            throw std::invalid_argument("build_hybrid: coarse size exceeds the dense factorization cap");
        Smoother smoother(options.smoother, current, setup_counter);
        SparseMatrix coarse = galerkin_product(current, basis.matrix(), setup_counter);
        levels.push_back({std::move(current), std::move(smoother), std::move(basis)});
        current = std::move(coarse);
    }
    if (options.levels == 1) {
        Smoother smoother(options.smoother, current, setup_counter);
        levels.push_back({std::move(current), std::move(smoother), std::nullopt});
        return HybridPreconditioner(std::move(levels), std::nullopt, std::nullopt, options.strategy);
    }
    LuFactorization lu(DenseMatrix::from_sparse(current), setup_counter);
    return HybridPreconditioner(std::move(levels), std::move(lu), std::move(current), options.strategy);
}

}  // namespace metasolve
