#pragma once

// Independent MAC totals rebuilt from iteration counts and the per-kernel cost formulas.
// Deliberately shares no code with the solvers it checks.

#include "metasolve/hybrid_precond.hpp"
#include "metasolve/krylov.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace test {

using u64 = std::uint64_t;

inline u64 smoother_macs(metasolve::SmootherType t, u64 nnz, u64 n, int steps)
{
    using metasolve::SmootherType;
    if (steps <= 0) return 0;
    const auto s = static_cast<u64>(steps);
    switch (t) {
    case SmootherType::Jacobi: return s * (nnz + 2 * n);
    case SmootherType::GaussSeidel: return s * nnz;
    case SmootherType::Sor: return s * (nnz + n);
    case SmootherType::Ssor: return s * 2 * (nnz + n);
    case SmootherType::Chebyshev: return (nnz + n) + s * (nnz + 6 * n) + (s / 50) * (nnz + n);
    }
    throw std::logic_error("smoother_macs");
}

/// One hybrid application from `depth` down; an empty shape means no preconditioner.
inline u64 hybrid_macs(const std::vector<metasolve::LevelShape>& shape, int pre, int post, std::size_t depth = 0)
{
    if (shape.empty()) return 0;
    const auto& l = shape[depth];
    const auto n = static_cast<u64>(l.size), nnz = static_cast<u64>(l.nnz);
    u64 cost = smoother_macs(l.smoother, nnz, n, pre) + smoother_macs(l.smoother, nnz, n, post);
    if (l.coarse_size == 0) return cost;
    const auto nc = static_cast<u64>(l.coarse_size);
    const u64 inner = depth + 2 == shape.size() ? nc * nc : hybrid_macs(shape, pre, post, depth + 1);
    return cost + (nnz + n) + n * nc + inner + n * nc + n;
}

/// Solve-phase MACs of one Krylov solve with preconditioner cost `pc` per application.
inline u64 krylov_macs(metasolve::KrylovMethod method, const metasolve::SolveReport& rep, u64 nnz, u64 n, u64 pc)
{
    using metasolve::KrylovMethod;
    if (rep.breakdown) throw std::invalid_argument("krylov_macs: breakdown runs are not recounted");
    const auto k = static_cast<u64>(rep.iterations);
    switch (method) {
    case KrylovMethod::Cg:
        if (k == 0) return nnz + 3 * n;
        return (nnz + 3 * n) + (pc + n) + (k - 1) * (nnz + 6 * n + pc) + (nnz + 4 * n);
    case KrylovMethod::Bicgstab: {
        u64 total = nnz + 3 * n;
        if (k == 0) return total;
        if (rep.half_step_exit) return total + (k - 1) * (2 * pc + 2 * nnz + 12 * n) + (pc + nnz + 7 * n);
        return total + k * (2 * pc + 2 * nnz + 12 * n);
    }
    case KrylovMethod::Fgmres: {
        u64 total = n;
        for (const int len : rep.cycle_lengths) {
            const auto l = static_cast<u64>(len);
            total += (nnz + 2 * n) + n;
            for (u64 j = 1; j <= l; ++j) total += pc + nnz + (2 * j + 2) * n;
            total += l * n;
        }
        return total + (nnz + 2 * n);
    }
    }
    throw std::logic_error("krylov_macs");
}

}  // namespace test
