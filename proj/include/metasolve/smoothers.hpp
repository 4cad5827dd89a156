#pragma once

#include "metasolve/linalg.hpp"

#include <span>
#include <string>

namespace metasolve {

enum class SmootherType { Jacobi, GaussSeidel, Sor, Ssor, Chebyshev };

/// Smoother selection plus its free parameters.
struct SmootherKind {
    SmootherType type = SmootherType::GaussSeidel;
    double omega = 1.5;        // SOR / SSOR relaxation factor, 0 < omega < 2
    double cheb_ratio = 30.0;  // Chebyshev: lambda_min = lambda_max / cheb_ratio

    /// Accepts jacobi | gauss_seidel | sor | ssor | chebyshev.
    static SmootherKind parse(const std::string& name, double omega = 1.5, double cheb_ratio = 30.0);
    [[nodiscard]] std::string name() const;
    [[nodiscard]] bool is_relaxation() const { return type != SmootherType::Chebyshev; }
    void validate() const;
};

struct SpectrumEstimate {
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    int iterations_used = 0;
};

/// `sweeps` stationary iterations x <- x + M^{-1}(b - A x), with M = D (Jacobi),
/// D + L (Gauss-Seidel), D/omega + L (SOR), or the symmetric SOR splitting.
/// Gauss-Seidel type sweeps run in place.
///
/// MACs per sweep: Jacobi nnz + 2n, Gauss-Seidel nnz, SOR nnz + n, SSOR 2(nnz + n).
void relax_sweeps(const SmootherKind& kind, const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                  int sweeps, CostCounter& counter);

/// Chebyshev semi-iterative method on [lambda_min, lambda_max]. After n steps the
/// residual is p_n(A) r0 with p_n(t) = T_n((t - a)/c) / T_n(-a/c).
/// The residual recurrence is re-synchronised with b - A x every 50 steps.
///
/// MACs: (nnz + n) + steps * (nnz + 6n) + floor(steps / 50) * (nnz + n).
void chebyshev_iterate(const SparseMatrix& a, std::span<const double> b, std::span<double> x, double lambda_min,
                       double lambda_max, int steps, CostCounter& counter);

inline constexpr int kChebyshevResyncInterval = 50;
inline constexpr int kPowerIterations = 30;
inline constexpr double kSpectrumSafety = 1.05;

/// Power-iteration estimate of lambda_max (30 iterations, inflated by 1.05);
/// lambda_min = lambda_max / ratio. MACs: 2n + 30 (nnz + 3n) per attempt.
SpectrumEstimate estimate_spectrum(const SparseMatrix& a, CostCounter& counter, double ratio = 30.0,
                                   std::uint64_t seed = 0x5eed);

/// A smoother bound to one operator; holds the spectrum estimate for Chebyshev.
class Smoother {
public:
    Smoother() = default;
    Smoother(const SmootherKind& kind, const SparseMatrix& a, CostCounter& setup_counter);

    /// `steps` sweeps for relaxation, a degree-`steps` polynomial for Chebyshev.
    void apply(const SparseMatrix& a, std::span<const double> b, std::span<double> x, int steps,
               CostCounter& counter) const;

    [[nodiscard]] const SmootherKind& kind() const { return kind_; }
    [[nodiscard]] const SpectrumEstimate& spectrum() const { return spectrum_; }

private:
    SmootherKind kind_;
    SpectrumEstimate spectrum_;
};

}  // namespace metasolve
