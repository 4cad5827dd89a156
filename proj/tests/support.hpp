#pragma once

#include "metasolve/dense.hpp"
#include "metasolve/linalg.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace test {

using metasolve::Index;
using metasolve::SparseMatrix;
using metasolve::Vector;

inline Vector random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

/// Q diag(eig) Q^T with a random orthogonal Q, returned row-major.
inline std::vector<double> random_spd_dense(Index n, std::mt19937_64& rng, double lo = 1.0, double hi = 10.0)
{
    metasolve::DenseMatrix g(n, n);
    std::normal_distribution<double> normal;
    for (auto& v : g.data()) v = normal(rng);
    const metasolve::DenseMatrix q = metasolve::thin_q(g);
    std::uniform_real_distribution<double> u(lo, hi);
    Vector eig(static_cast<std::size_t>(n));
    for (auto& e : eig) e = u(rng);
    std::vector<double> a(static_cast<std::size_t>(n * n), 0.0);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Index k = 0; k < n; ++k) s += q(i, k) * eig[static_cast<std::size_t>(k)] * q(j, k);
            a[static_cast<std::size_t>(i * n + j)] = s;
        }
    // exact symmetry
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < i; ++j) a[static_cast<std::size_t>(i * n + j)] = a[static_cast<std::size_t>(j * n + i)];
    return a;
}

inline SparseMatrix random_spd(Index n, std::mt19937_64& rng, double lo = 1.0, double hi = 10.0)
{
    return SparseMatrix::from_dense(n, n, random_spd_dense(n, rng, lo, hi));
}

/// Row-major dense product y = A x.
inline Vector dense_apply(const std::vector<double>& a, Index n, const Vector& x)
{
    Vector y(static_cast<std::size_t>(n), 0.0);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) y[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i * n + j)] * x[static_cast<std::size_t>(j)];
    return y;
}

inline double max_abs_diff(const Vector& a, const Vector& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double norm(const Vector& v) { return metasolve::norm2(v); }

/// 1-D Laplacian tridiag(-1, 2, -1), a small SPD test operator.
inline SparseMatrix laplacian_1d(Index n)
{
    std::vector<metasolve::Triplet> t;
    for (Index i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace test
