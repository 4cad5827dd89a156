#pragma once

#include "metasolve/coarse_basis.hpp"
#include "metasolve/preconditioner.hpp"
#include "metasolve/smoothers.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace metasolve {

/// Relaxation counts around one coarse correction ("s-1-s").
struct SmoothingStrategy {
    int pre = 1;
    int post = 1;

    /// Parses "pre-1-post", e.g. "3-1-3".
    static SmoothingStrategy parse(const std::string& text);
    [[nodiscard]] std::string str() const;
    friend bool operator==(const SmoothingStrategy&, const SmoothingStrategy&) = default;
};

struct HybridOptions {
    int levels = 2;  // 1: smoothing only; 2: one coarse space; 3: nested coarse spaces
    SmootherKind smoother;
    SmoothingStrategy strategy;
};

/// Supplies the prolongation from level `depth` (0 = finest) given that level's operator.
using BasisProvider = std::function<ProlongationBasis(int depth, const SparseMatrix& a)>;

/// Structural data of one level, enough to predict the cost of an application.
struct LevelShape {
    Index size = 0;
    Index nnz = 0;
    Index coarse_size = 0;  // 0 when this level has no coarse correction
    SmootherType smoother = SmootherType::GaussSeidel;
};

/// Pre-smoothing, coarse correction P A_c^{-1} P^T, post-smoothing; each stage works
/// against the residual of the current iterate. With three levels the coarse solve
/// of the middle level is itself one such sandwich (V-shaped recursion).
class HybridPreconditioner final : public Preconditioner {
public:
    struct Level {
        SparseMatrix a;  // level operator; the finest is a copy of the system matrix
        Smoother smoother;
        std::optional<ProlongationBasis> basis;  // absent on a 1-level preconditioner
    };

    HybridPreconditioner(std::vector<Level> levels, std::optional<LuFactorization> coarse_solver,
                         std::optional<SparseMatrix> coarse_operator, SmoothingStrategy strategy);

    [[nodiscard]] Index size() const override { return levels_.front().a.rows(); }
    void apply(std::span<const double> r, std::span<double> z, CostCounter& counter) const override;
    [[nodiscard]] std::string describe() const override;
    [[nodiscard]] std::size_t bytes() const override;

    [[nodiscard]] int level_count() const { return static_cast<int>(levels_.size()) + (coarse_solver_ ? 1 : 0); }
    [[nodiscard]] const std::vector<Level>& levels() const { return levels_; }
    [[nodiscard]] const std::optional<SparseMatrix>& coarse_operator() const { return coarse_operator_; }
    [[nodiscard]] const SmoothingStrategy& strategy() const { return strategy_; }
    [[nodiscard]] std::vector<LevelShape> shape() const;

private:
    void sandwich(std::size_t depth, std::span<const double> r, std::span<double> z, CostCounter& counter) const;
    void coarse_correct(std::size_t depth, std::span<const double> r, std::span<double> z, CostCounter& counter) const;

    std::vector<Level> levels_;
    std::optional<LuFactorization> coarse_solver_;
    std::optional<SparseMatrix> coarse_operator_;
    SmoothingStrategy strategy_;
};

/// A_c = P^T A P. MACs: nnz(A) * m + n * m^2 for an n x m basis.
SparseMatrix galerkin_product(const SparseMatrix& a, const DenseMatrix& p, CostCounter& counter);

/// Builds the level hierarchy, the Galerkin operators, and the factorization of the deepest one.
HybridPreconditioner build_hybrid(const SparseMatrix& a, const HybridOptions& options, const BasisProvider& bases,
                                  CostCounter& setup_counter);

/// Coarse operators above this size are rejected (dense factorization cap).
inline constexpr Index kMaxCoarseSize = 2000;

}  // namespace metasolve
