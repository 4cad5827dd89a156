#include "metasolve/krylov.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace metasolve {

KrylovMethod parse_krylov(const std::string& name)
{
    if (name == "cg") return KrylovMethod::Cg;
    if (name == "fgmres") return KrylovMethod::Fgmres;
    if (name == "bicgstab") return KrylovMethod::Bicgstab;
    throw std::invalid_argument("unknown krylov method '" + name + "' (expected cg|fgmres|bicgstab)");
}

std::string krylov_name(KrylovMethod method)
{
    switch (method) {
    case KrylovMethod::Cg: return "cg";
    case KrylovMethod::Fgmres: return "fgmres";
    case KrylovMethod::Bicgstab: return "bicgstab";
    }
    return "unknown";
}

namespace {

void check_inputs(const SparseMatrix& a, std::span<const double> b, std::span<const double> x,
                  const Preconditioner& pc, const KrylovOptions& options)
{
    if (!a.square()) throw DimensionError("krylov: matrix must be square");
    if (static_cast<Index>(b.size()) != a.rows() || x.size() != b.size() || pc.size() != a.rows())
        throw DimensionError("krylov: dimension mismatch");
    if (!(options.tol > 0.0)) throw std::invalid_argument("krylov: tol must be positive");
    if (options.maxit < 0) throw std::invalid_argument("krylov: maxit must be non-negative");
}

// Runs a solver body and stamps cost, time and memory onto its report.
template <typename Body>
SolveReport instrumented(CostCounter& counter, Body&& body)
{
    SolveReport report;
    const std::uint64_t macs0 = counter.macs();
    const auto start = std::chrono::steady_clock::now();
    body(report);
    report.macs = counter.macs() - macs0;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.peak_bytes = counter.peak_bytes();
    if (!report.residual_history.empty()) report.final_relative_residual = report.residual_history.back();
    return report;
}

double reference_norm(double bnorm) { return bnorm > 0.0 ? bnorm : 1.0; }

}  // namespace

SolveReport cg(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const Preconditioner& pc,
               const KrylovOptions& options, CostCounter& counter)
{
    check_inputs(a, b, x, pc, options);
    return instrumented(counter, [&](SolveReport& report) {
        const std::size_t n = b.size();
        const ScopedBytes work(counter, 4 * vector_bytes(n));

        const double bnorm = reference_norm(norm2(b, counter));
        Vector r(n), z(n), p(n), q(n);
        residual(a, b, x, r, counter);
        double rel = norm2(r, counter) / bnorm;
        report.residual_history.push_back(rel);
        if (rel <= options.tol) {
            report.converged = true;
            return;
        }
        pc.apply(r, z, counter);
        p = z;
        double rz = dot(r, z, counter);
        for (int k = 1; k <= options.maxit; ++k) {
            spmv(a, p, q, counter);
            const double pq = dot(p, q, counter);
            if (!(pq > 0.0)) {
                report.breakdown = true;
                break;
            }
            const double alpha = rz / pq;
            axpy(alpha, p, x, counter);
            axpy(-alpha, q, r, counter);
            rel = norm2(r, counter) / bnorm;
            report.residual_history.push_back(rel);
            report.iterations = k;
            if (rel <= options.tol) {
                report.converged = true;
                break;
            }
            if (k == options.maxit) break;
            pc.apply(r, z, counter);
            const double rz_new = dot(r, z, counter);
            const double beta = rz_new / rz;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
            counter.add_macs(n);
            rz = rz_new;
        }
    });
}

SolveReport fgmres(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const Preconditioner& pc,
                   const KrylovOptions& options, CostCounter& counter)
{
    check_inputs(a, b, x, pc, options);
    if (options.restart < 1) throw std::invalid_argument("fgmres: restart must be >= 1");
    return instrumented(counter, [&](SolveReport& report) {
        const std::size_t n = b.size();
        const auto m = static_cast<std::size_t>(options.restart);
        const ScopedBytes work(counter, (2 * m + 2) * vector_bytes(n));

        const double bnorm = reference_norm(norm2(b, counter));
        std::vector<Vector> v(m + 1, Vector(n));
        std::vector<Vector> z(m, Vector(n));
        std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
        std::vector<double> cs(m), sn(m), g(m + 1);
        Vector r(n), w(n);
        bool restarted_after_breakdown = false;

        while (true) {
            residual(a, b, x, r, counter);
            const double beta = norm2(r, counter);
            const double rel = beta / bnorm;
            if (report.residual_history.empty())
                report.residual_history.push_back(rel);
            else
                report.residual_history.back() = rel;
            if (rel <= options.tol) {
                report.converged = true;
                break;
            }
            if (report.iterations >= options.maxit) break;

            for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
            counter.add_macs(n);
            std::fill(g.begin(), g.end(), 0.0);
            g[0] = beta;
            std::size_t inner = 0;
            bool lucky = false;
            for (std::size_t j = 0; j < m && report.iterations < options.maxit; ++j) {
                pc.apply(v[j], z[j], counter);
                spmv(a, z[j], w, counter);
                for (std::size_t i = 0; i <= j; ++i) {
                    h[i][j] = dot(w, v[i], counter);
                    axpy(-h[i][j], v[i], w, counter);
                }
                const double hnext = norm2(w, counter);
                if (hnext > 0.0) {
                    for (std::size_t i = 0; i < n; ++i) v[j + 1][i] = w[i] / hnext;
                    counter.add_macs(n);
                } else {
                    lucky = true;
                }
                for (std::size_t i = 0; i < j; ++i) {
                    const double tmp = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                    h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                    h[i][j] = tmp;
                }
                const double denom = std::hypot(h[j][j], hnext);
                if (denom == 0.0) {
                    cs[j] = 1.0;
                    sn[j] = 0.0;
                } else {
                    cs[j] = h[j][j] / denom;
                    sn[j] = hnext / denom;
                }
                h[j][j] = cs[j] * h[j][j] + sn[j] * hnext;
                g[j + 1] = -sn[j] * g[j];
                g[j] = cs[j] * g[j];
                ++inner;
                ++report.iterations;
                report.residual_history.push_back(std::abs(g[j + 1]) / bnorm);
                if (std::abs(g[j + 1]) / bnorm <= options.tol || lucky) break;
            }

            // back substitution on the rotated Hessenberg system
            std::vector<double> y(inner, 0.0);
            bool singular = false;
            for (std::size_t ii = inner; ii-- > 0;) {
                double s = g[ii];
                for (std::size_t k = ii + 1; k < inner; ++k) s -= h[ii][k] * y[k];
                if (h[ii][ii] == 0.0) {
                    singular = true;
                    break;
                }
                y[ii] = s / h[ii][ii];
            }
            report.cycle_lengths.push_back(static_cast<int>(inner));
            if (singular) {
                if (restarted_after_breakdown) {
                    report.breakdown = true;
                    break;
                }
                restarted_after_breakdown = true;
                continue;
            }
            for (std::size_t k = 0; k < inner; ++k) axpy(y[k], z[k], x, counter);
        }
    });
}

SolveReport bicgstab(const SparseMatrix& a, std::span<const double> b, std::span<double> x, const Preconditioner& pc,
                     const KrylovOptions& options, CostCounter& counter)
{
    check_inputs(a, b, x, pc, options);
    return instrumented(counter, [&](SolveReport& report) {
        const std::size_t n = b.size();
        const ScopedBytes work(counter, 8 * vector_bytes(n));

        const double bnorm = reference_norm(norm2(b, counter));
        Vector r(n), r_hat(n), p(n, 0.0), v(n, 0.0), p_hat(n), s(n), s_hat(n), t(n);
        residual(a, b, x, r, counter);
        double rel = norm2(r, counter) / bnorm;
        report.residual_history.push_back(rel);
        if (rel <= options.tol) {
            report.converged = true;
            return;
        }
        r_hat = r;
        double rho_old = 1.0, alpha = 1.0, omega = 1.0;
        for (int k = 1; k <= options.maxit; ++k) {
            const double rho = dot(r_hat, r, counter);
            if (rho == 0.0) {
                report.breakdown = true;
                break;
            }
            const double beta = (rho / rho_old) * (alpha / omega);
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
            counter.add_macs(2 * n);
            pc.apply(p, p_hat, counter);
            spmv(a, p_hat, v, counter);
            const double rv = dot(r_hat, v, counter);
            if (rv == 0.0) {
                report.breakdown = true;
                break;
            }
            alpha = rho / rv;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            counter.add_macs(n);
            const double srel = norm2(s, counter) / bnorm;
            report.iterations = k;
            if (srel <= options.tol) {
                axpy(alpha, p_hat, x, counter);
                report.residual_history.push_back(srel);
                report.converged = true;
                report.half_step_exit = true;
                break;
            }
            pc.apply(s, s_hat, counter);
            spmv(a, s_hat, t, counter);
            const double tt = dot(t, t, counter);
            const double ts = dot(t, s, counter);
            if (tt == 0.0) {
                report.residual_history.push_back(srel);
                report.breakdown = true;
                break;
            }
            omega = ts / tt;
            for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p_hat[i] + omega * s_hat[i];
            counter.add_macs(2 * n);
            for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
            counter.add_macs(n);
            rel = norm2(r, counter) / bnorm;
            report.residual_history.push_back(rel);
            if (rel <= options.tol) {
                report.converged = true;
                break;
            }
            if (omega == 0.0) {
                report.breakdown = true;
                break;
            }
            rho_old = rho;
        }
    });
}

SolveReport krylov_solve(KrylovMethod method, const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                         const Preconditioner& pc, const KrylovOptions& options, CostCounter& counter)
{
    switch (method) {
    case KrylovMethod::Cg: return cg(a, b, x, pc, options, counter);
    case KrylovMethod::Fgmres: return fgmres(a, b, x, pc, options, counter);
    case KrylovMethod::Bicgstab: return bicgstab(a, b, x, pc, options, counter);
    }
    throw std::invalid_argument("krylov_solve: unknown method");
}

}  // namespace metasolve
