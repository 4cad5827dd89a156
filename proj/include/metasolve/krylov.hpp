#pragma once

#include "metasolve/linalg.hpp"
#include "metasolve/preconditioner.hpp"

#include <span>
#include <string>
#include <vector>

namespace metasolve {

enum class KrylovMethod { Cg, Fgmres, Bicgstab };

KrylovMethod parse_krylov(const std::string& name);
std::string krylov_name(KrylovMethod method);

struct KrylovOptions {
    double tol = 1e-12;  // on ||b - A x||_2 / ||b||_2
    int maxit = 10000;
    int restart = 50;    // FGMRES cycle length
};

/// Outcome of one linear solve.
struct SolveReport {
    int iterations = 0;
    bool converged = false;
    bool breakdown = false;
    double final_relative_residual = 0.0;
    std::vector<double> residual_history;  // iterations + 1 entries
    std::uint64_t macs = 0;
    double wall_seconds = 0.0;
    std::size_t peak_bytes = 0;
    std::vector<int> cycle_lengths;  // FGMRES: inner iterations of each restart cycle
    bool half_step_exit = false;     // BiCGStab: converged after the first half of the last iteration
};

/// Preconditioned conjugate gradients. One preconditioner application per iteration.
///
/// MACs for k iterations with the stop triggered inside iteration k:
///   setup (nnz + 3n) + pc + n, then (k-1) * (nnz + 6n + pc) + (nnz + 4n).
/// With zero iterations (initial guess already converged): nnz + 3n.
SolveReport cg(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const Preconditioner& pc,
               const KrylovOptions& options, CostCounter& counter);

/// Right-preconditioned flexible GMRES(m) with modified Gram-Schmidt.
/// Every cycle starts from the true residual; convergence is decided on it.
///
/// MACs: n for ||b||; per cycle nnz + 2n for the true residual, then (if continuing) n to
/// normalize, pc + nnz + (2k + 2)n for inner step k (n less on an exact breakdown), and
/// L n to update x after a cycle of length L.
SolveReport fgmres(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const Preconditioner& pc,
                   const KrylovOptions& options, CostCounter& counter);

/// Right-preconditioned BiCGStab; two matvecs and two preconditioner applications per
/// full iteration. A stop after the first half step still counts as one iteration.
///
/// MACs: setup nnz + 3n, each full iteration 2 pc + 2 nnz + 12n, a half-step exit pc + nnz + 7n.
SolveReport bicgstab(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const Preconditioner& pc,
                     const KrylovOptions& options, CostCounter& counter);

SolveReport krylov_solve(KrylovMethod method, const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                         const Preconditioner& pc, const KrylovOptions& options, CostCounter& counter);

}  // namespace metasolve
