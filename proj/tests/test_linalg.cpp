#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace metasolve;

TEST_CASE("spmv examples")
{
    CostCounter c;
    CHECK(spmv(SparseMatrix::identity(2), Vector{3, -1}, c) == Vector{3, -1});

    const auto a = SparseMatrix::from_dense(2, 2, std::vector<double>{2, 0, 1, 3});
    CostCounter c2;
    CHECK(spmv(a, Vector{1, 1}, c2) == Vector{2, 4});
    CHECK(c2.macs() == 3);

    const SparseMatrix zero(3, 3, {0, 0, 0, 0}, {}, {});
    CostCounter c3;
    CHECK(spmv(zero, Vector{1, 2, 3}, c3) == Vector{0, 0, 0});
    CHECK(c3.macs() == 0);

    CHECK_THROWS_AS(spmv(a, Vector{1, 2, 3}, c3), DimensionError);
}

TEST_CASE("spmv matches dense multiply on random sparse matrices")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    std::bernoulli_distribution keep(0.2);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 50;
        std::vector<double> dense(n * n, 0.0);
        for (auto& v : dense)
            if (keep(rng)) v = u(rng);
        const auto a = SparseMatrix::from_dense(n, n, dense);
        const Vector x = test::random_vector(n, rng);
        CostCounter c;
        const Vector y = spmv(a, x, c);
        const Vector ref = test::dense_apply(dense, n, x);
        CHECK(test::max_abs_diff(y, ref) <= 1e-13 * std::max(1.0, test::norm(ref)));

        CostCounter k;
        for (int i = 0; i < 5; ++i) spmv(a, x, k);
        CHECK(k.macs() == static_cast<std::uint64_t>(5 * a.nnz()));
    }
}

TEST_CASE("vector kernels")
{
    CostCounter c;
    CHECK(dot(Vector{1, 2}, Vector{3, 4}, c) == 11.0);
    CHECK(norm2(Vector{3, 4}, c) == 5.0);
    Vector y{0, 1};
    axpy(2.0, Vector{1, 0}, y, c);
    CHECK(y == Vector{2, 1});
    CHECK(c.macs() == 6);
    CHECK_THROWS_AS(dot(Vector{1}, Vector{1, 2}, c), DimensionError);
    CHECK_THROWS_AS(axpy(1.0, Vector{1}, y, c), DimensionError);

    Vector r(2);
    CostCounter rc;
    residual(SparseMatrix::identity(2), Vector{1, 1}, Vector{1, 0}, r, rc);
    CHECK(r == Vector{0, 1});
    CHECK(rc.macs() == 2 + 2);
}

TEST_CASE("dense_factor_solve")
{
    CHECK(dense_factor_solve(SparseMatrix::identity(3), Vector{1, 2, 3}) == Vector{1, 2, 3});
    const auto a = SparseMatrix::from_dense(2, 2, std::vector<double>{4, 1, 1, 3});
    const Vector x = dense_factor_solve(a, Vector{1, 2});
    CHECK(x[0] == doctest::Approx(1.0 / 11).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(7.0 / 11).epsilon(1e-15));
    const auto s = SparseMatrix::from_dense(2, 2, std::vector<double>{1, 1, 1, 1});
    CHECK_THROWS_AS(dense_factor_solve(s, Vector{1, 2}), SingularMatrixError);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 8 + trial % 13;
        std::vector<double> dense(n * n);
        for (auto& v : dense) v = std::uniform_real_distribution<double>(-1, 1)(rng);
        for (Index i = 0; i < n; ++i) dense[i * n + i] += n;  // diagonally dominant
        const auto m = SparseMatrix::from_dense(n, n, dense);
        const Vector b = test::random_vector(n, rng);
        const Vector sol = dense_factor_solve(m, b);
        CostCounter c;
        Vector r(n);
        residual(m, b, sol, r, c);
        double fro = 0.0;
        for (const double v : dense) fro += v * v;
        CHECK(test::norm(r) <= 1e-10 * (std::sqrt(fro) * test::norm(sol) + test::norm(b)));
    }
}

TEST_CASE("LU MAC accounting")
{
    CostCounter c;
    const LuFactorization lu(DenseMatrix::from_sparse(test::laplacian_1d(6)), c);
    CHECK(c.macs() == LuFactorization::factor_macs(6));
    CHECK(LuFactorization::factor_macs(1) == 0);
    CHECK(LuFactorization::factor_macs(2) == 1 + 1);
    Vector x(6);
    CostCounter s;
    lu.solve(Vector(6, 1.0), x, s);
    CHECK(s.macs() == 36);
}

TEST_CASE("CSR invariants are enforced")
{
    CHECK_THROWS(SparseMatrix(2, 2, {0, 2, 1}, {0, 1}, {1, 1}));                   // decreasing offsets
    CHECK_THROWS(SparseMatrix(2, 2, {1, 1, 2}, {0, 1}, {1, 1}));                   // offsets[0] != 0
    CHECK_THROWS(SparseMatrix(1, 2, {0, 2}, {1, 0}, {1, 1}));                      // unsorted columns
    CHECK_THROWS(SparseMatrix(1, 2, {0, 2}, {0, 0}, {1, 1}));                      // duplicate column
    CHECK_THROWS(SparseMatrix(1, 2, {0, 1}, {2}, {1}));                            // column out of range
    CHECK_THROWS(SparseMatrix(1, 1, {0, 1}, {0}, {std::nan("")}));                // NaN
    CHECK_NOTHROW(SparseMatrix(1, 2, {0, 2}, {0, 1}, {1, 1}));
}

TEST_CASE("triplets sum duplicates and add merges patterns")
{
    const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 0, 5.0}});
    CHECK(a.at(0, 0) == 3.0);
    CHECK(a.at(1, 0) == 5.0);
    CHECK(a.at(1, 1) == 0.0);
    const auto b = SparseMatrix::add(2.0, a, -1.0, SparseMatrix::identity(2));
    CHECK(b.at(0, 0) == 5.0);
    CHECK(b.at(1, 1) == -1.0);
    CHECK(b.at(1, 0) == 10.0);
}

TEST_CASE("matrix text format round-trips")
{
    std::mt19937_64 rng(3);
    const auto a = test::random_spd(7, rng);
    std::stringstream buf;
    write_matrix(buf, a);
    const auto b = read_matrix(buf);
    CHECK(b.rows() == a.rows());
    CHECK(b.nnz() == a.nnz());
    CHECK(b.to_dense() == a.to_dense());

    std::stringstream bad("2 2 1\n0 5 1.0\n");
    CHECK_THROWS(read_matrix(bad));
}

TEST_CASE("memory accounting tracks the peak")
{
    CostCounter c;
    {
        ScopedBytes a(c, 100);
        {
            ScopedBytes b(c, 50);
            CHECK(c.current_bytes() == 150);
        }
        CHECK(c.current_bytes() == 100);
    }
    CHECK(c.current_bytes() == 0);
    CHECK(c.peak_bytes() == 150);
}
