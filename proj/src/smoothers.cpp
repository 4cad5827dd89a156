#include "metasolve/smoothers.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace metasolve {

SmootherKind SmootherKind::parse(const std::string& name, double omega, double cheb_ratio)
{
    SmootherKind kind;
    kind.omega = omega;
    kind.cheb_ratio = cheb_ratio;
    if (name == "jacobi")
        kind.type = SmootherType::Jacobi;
    else if (name == "gauss_seidel" || name == "gs")
        kind.type = SmootherType::GaussSeidel;
    else if (name == "sor")
        kind.type = SmootherType::Sor;
    else if (name == "ssor")
        kind.type = SmootherType::Ssor;
    else if (name == "chebyshev")
        kind.type = SmootherType::Chebyshev;
    else
        throw std::invalid_argument("unknown smoother '" + name + "' (expected jacobi|gauss_seidel|sor|ssor|chebyshev)");
    kind.validate();
    return kind;
}

std::string SmootherKind::name() const
{
    switch (type) {
    case SmootherType::Jacobi: return "jacobi";
    case SmootherType::GaussSeidel: return "gauss_seidel";
    case SmootherType::Sor: return "sor";
    case SmootherType::Ssor: return "ssor";
    case SmootherType::Chebyshev: return "chebyshev";
    }
    return "unknown";
}

void SmootherKind::validate() const
{
    if ((type == SmootherType::Sor || type == SmootherType::Ssor) && !(omega > 0.0 && omega < 2.0))
        throw std::invalid_argument("SOR/SSOR require 0 < omega < 2");
    if (type == SmootherType::Chebyshev && !(cheb_ratio > 1.0))
        throw std::invalid_argument("Chebyshev requires cheb_ratio > 1");
}

namespace {

void check_diagonal(const SparseMatrix& a)
{
    for (Index i = 0; i < a.rows(); ++i)
        if (a.at(i, i) == 0.0) throw std::invalid_argument("relaxation: zero diagonal entry at row " + std::to_string(i));
}

// One in-place sweep with blend factor omega (omega = 1 is Gauss-Seidel).
template <bool Forward>
void sor_sweep(const SparseMatrix& a, std::span<const double> b, std::span<double> x, double omega)
{
    const auto offsets = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    const Index n = a.rows();
    for (Index step = 0; step < n; ++step) {
        const Index i = Forward ? step : n - 1 - step;
        double s = b[i];
        double diag = 0.0;
        for (Index k = offsets[i]; k < offsets[i + 1]; ++k) {
            if (cols[k] == i)
                diag = vals[k];
            else
                s -= vals[k] * x[cols[k]];
        }
        x[i] = omega == 1.0 ? s / diag : (1.0 - omega) * x[i] + omega * s / diag;
    }
}

}  // namespace

void relax_sweeps(const SmootherKind& kind, const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                  int sweeps, CostCounter& counter)
{
    if (!a.square()) throw DimensionError("relax_sweeps: matrix must be square");
    if (static_cast<Index>(b.size()) != a.rows() || static_cast<Index>(x.size()) != a.rows())
        throw DimensionError("relax_sweeps: dimension mismatch");
    if (!kind.is_relaxation()) throw std::invalid_argument("relax_sweeps: Chebyshev is not a relaxation method");
    kind.validate();
    if (sweeps <= 0) return;
    check_diagonal(a);
    const auto n = static_cast<std::uint64_t>(a.rows());
    const auto nnz = static_cast<std::uint64_t>(a.nnz());
    switch (kind.type) {
    case SmootherType::Jacobi: {
        const Vector d = a.diagonal();
        Vector r(x.size());
        for (int s = 0; s < sweeps; ++s) {
            residual(a, b, x, r, counter);
            for (std::size_t i = 0; i < r.size(); ++i) x[i] += r[i] / d[i];
            counter.add_macs(n);
        }
        break;
    }
    case SmootherType::GaussSeidel:
        for (int s = 0; s < sweeps; ++s) sor_sweep<true>(a, b, x, 1.0);
        counter.add_macs(static_cast<std::uint64_t>(sweeps) * nnz);
        break;
    case SmootherType::Sor:
        for (int s = 0; s < sweeps; ++s) sor_sweep<true>(a, b, x, kind.omega);
        counter.add_macs(static_cast<std::uint64_t>(sweeps) * (nnz + n));
        break;
    case SmootherType::Ssor:
        for (int s = 0; s < sweeps; ++s) {
            sor_sweep<true>(a, b, x, kind.omega);
            sor_sweep<false>(a, b, x, kind.omega);
        }
        counter.add_macs(static_cast<std::uint64_t>(sweeps) * 2 * (nnz + n));
        break;
    case SmootherType::Chebyshev: break;
    }
}

void chebyshev_iterate(const SparseMatrix& a, std::span<const double> b, std::span<double> x, double lambda_min,
                       double lambda_max, int steps, CostCounter& counter)
{
    if (!(lambda_min > 0.0 && lambda_min < lambda_max))
        throw std::invalid_argument("chebyshev_iterate: require 0 < lambda_min < lambda_max");
    if (static_cast<Index>(b.size()) != a.rows() || static_cast<Index>(x.size()) != a.cols() || !a.square())
        throw DimensionError("chebyshev_iterate: dimension mismatch");
    if (steps <= 0) return;
    const std::size_t n = x.size();
    const double center = 0.5 * (lambda_max + lambda_min);
    const double half_width = 0.5 * (lambda_max - lambda_min);
    const double eta = -center / half_width;
    const double quarter_c2 = 0.25 * half_width * half_width;

    Vector r(n);
    residual(a, b, x, r, counter);
    Vector x_prev(n, 0.0);
    Vector r_prev(n, 0.0);
    Vector x_next(n);
    Vector r_next(n);
    Vector ar(n);
    double beta = 0.0;        // beta_{i-1}
    double gamma = -center;   // gamma_i
    for (int i = 0; i < steps; ++i) {
        for (std::size_t k = 0; k < n; ++k) x_next[k] = -(r[k] + center * x[k] + beta * x_prev[k]) / gamma;
        spmv(a, r, ar, counter);
        for (std::size_t k = 0; k < n; ++k) r_next[k] = (ar[k] - center * r[k] - beta * r_prev[k]) / gamma;
        counter.add_macs(6 * n);

        std::copy(x.begin(), x.end(), x_prev.begin());
        std::copy(x_next.begin(), x_next.end(), x.begin());
        r_prev.swap(r);
        r.swap(r_next);

        if ((i + 1) % kChebyshevResyncInterval == 0) residual(a, b, x, r, counter);

        beta = i == 0 ? 0.5 * half_width / eta : quarter_c2 / gamma;
        gamma = -(center + beta);
    }
}

SpectrumEstimate estimate_spectrum(const SparseMatrix& a, CostCounter& counter, double ratio, std::uint64_t seed)
{
    if (!a.square()) throw DimensionError("estimate_spectrum: matrix must be square");
    if (!(ratio > 1.0)) throw std::invalid_argument("estimate_spectrum: ratio must exceed 1");
    const auto n = static_cast<std::size_t>(a.rows());
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> normal;
        Vector x(n);
        for (auto& v : x) v = normal(rng);
        double nrm = norm2(x, counter);
        if (nrm == 0.0) continue;
        scale(1.0 / nrm, x, counter);
        Vector y(n);
        double lambda = 0.0;
        bool broke = false;
        for (int it = 0; it < kPowerIterations; ++it) {
            spmv(a, x, y, counter);
            lambda = dot(x, y, counter);
            nrm = norm2(y, counter);
            if (nrm == 0.0 || !std::isfinite(nrm)) {
                broke = true;
                break;
            }
            for (std::size_t k = 0; k < n; ++k) x[k] = y[k] / nrm;
            counter.add_macs(n);
        }
        if (broke || !(lambda > 0.0)) continue;
        SpectrumEstimate est;
        est.lambda_max = kSpectrumSafety * lambda;
        est.lambda_min = est.lambda_max / ratio;
        est.iterations_used = kPowerIterations;
        return est;
    }
    throw NumericalError("estimate_spectrum: power iteration broke down twice");
}

Smoother::Smoother(const SmootherKind& kind, const SparseMatrix& a, CostCounter& setup_counter) : kind_(kind)
{
    kind_.validate();
    if (kind_.type == SmootherType::Chebyshev) {
        spectrum_ = estimate_spectrum(a, setup_counter, kind_.cheb_ratio);
    } else {
        check_diagonal(a);
    }
}

void Smoother::apply(const SparseMatrix& a, std::span<const double> b, std::span<double> x, int steps,
                     CostCounter& counter) const
{
    if (kind_.type == SmootherType::Chebyshev)
        chebyshev_iterate(a, b, x, spectrum_.lambda_min, spectrum_.lambda_max, steps, counter);
    else
        relax_sweeps(kind_, a, b, x, steps, counter);
}

}  // namespace metasolve
