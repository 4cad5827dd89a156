#include "metasolve/krylov.hpp"
#include "metasolve/sweep.hpp"

#include "mac_recount.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace metasolve;

namespace {

const KrylovMethod kAll[] = {KrylovMethod::Cg, KrylovMethod::Fgmres, KrylovMethod::Bicgstab};

// Nonsymmetric: 2-D upwinded convection-diffusion on an m x m grid.
SparseMatrix convection_diffusion(Index m, double wind)
{
    std::vector<Triplet> t;
    auto id = [m](Index i, Index j) { return i * m + j; };
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) {
            t.push_back({id(i, j), id(i, j), 4.0 + wind});
            if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0 - wind});
            if (i + 1 < m) t.push_back({id(i, j), id(i + 1, j), -1.0});
            if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
            if (j + 1 < m) t.push_back({id(i, j), id(i, j + 1), -1.0});
        }
    return SparseMatrix::from_triplets(m * m, m * m, t);
}

}  // namespace

TEST_CASE("method names")
{
    for (const auto m : kAll) CHECK(parse_krylov(krylov_name(m)) == m);
    CHECK_THROWS(parse_krylov("minres"));
}

TEST_CASE("small SPD example and zero right-hand side")
{
    const auto a = SparseMatrix::from_dense(2, 2, std::vector<double>{4, 1, 1, 3});
    const IdentityPreconditioner id(2);
    for (const auto m : kAll) {
        Vector x(2, 0.0);
        CostCounter c;
        const SolveReport rep = krylov_solve(m, a, Vector{1, 2}, x, id, {}, c);
        CHECK(rep.converged);
        CHECK(rep.iterations <= 2);
        CHECK(x[0] == doctest::Approx(1.0 / 11).epsilon(1e-10));
        CHECK(x[1] == doctest::Approx(7.0 / 11).epsilon(1e-10));

        Vector z(2, 0.0);
        const SolveReport zero = krylov_solve(m, a, Vector{0, 0}, z, id, {}, c);
        CHECK(zero.converged);
        CHECK(zero.iterations == 0);
        CHECK(z == Vector{0, 0});
    }
}

TEST_CASE("random SPD systems match the direct solution")
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 10; ++t) {
        const auto a = test::random_spd(30, rng, 1.0, 50.0);
        const Vector b = test::random_vector(30, rng);
        const Vector ref = dense_factor_solve(a, b);
        const IdentityPreconditioner id(30);
        for (const auto m : kAll) {
            Vector x(30, 0.0);
            CostCounter c;
            KrylovOptions opts;
            opts.restart = 7;
            const SolveReport rep = krylov_solve(m, a, b, x, id, opts, c);
            REQUIRE(rep.converged);
            CHECK(rep.final_relative_residual <= 1e-12);
            CHECK(test::max_abs_diff(x, ref) <= 1e-9 * test::norm(ref));
            CHECK(rep.residual_history.size() == static_cast<std::size_t>(rep.iterations) + 1);
            if (m == KrylovMethod::Fgmres)
                CHECK(std::accumulate(rep.cycle_lengths.begin(), rep.cycle_lengths.end(), 0) == rep.iterations);
        }
    }
}

TEST_CASE("nonsymmetric systems with FGMRES and BiCGStab")
{
    const auto a = convection_diffusion(12, 2.0);
    std::mt19937_64 rng(22);
    const Vector b = test::random_vector(a.rows(), rng);
    for (const auto m : {KrylovMethod::Fgmres, KrylovMethod::Bicgstab}) {
        Vector x(b.size(), 0.0);
        CostCounter c;
        KrylovOptions opts;
        opts.restart = 20;
        const SolveReport rep = krylov_solve(m, a, b, x, IdentityPreconditioner(a.rows()), opts, c);
        REQUIRE(rep.converged);
        Vector r(b.size());
        residual(a, b, x, r, c);
        CHECK(test::norm(r) <= 1e-11 * test::norm(b));
    }
}

TEST_CASE("iteration cap reports non-convergence")
{
    const auto mesh = build_mesh(17);
    const auto a = assemble(*mesh, ScalarField(mesh, 1.0)).stiffness;
    const Vector b(a.rows(), 1.0);
    KrylovOptions opts;
    opts.maxit = 3;
    for (const auto m : kAll) {
        Vector x(b.size(), 0.0);
        CostCounter c;
        const SolveReport rep = krylov_solve(m, a, b, x, IdentityPreconditioner(a.rows()), opts, c);
        CHECK_FALSE(rep.converged);
        CHECK(rep.iterations == 3);
    }
    opts.tol = 0.0;
    Vector x(b.size());
    CostCounter c;
    CHECK_THROWS(cg(a, b, x, IdentityPreconditioner(a.rows()), opts, c));
}

TEST_CASE("BiCGStab exits after a half step on the identity")
{
    const auto a = SparseMatrix::identity(5);
    Vector x(5, 0.0);
    CostCounter c;
    const SolveReport rep = bicgstab(a, Vector{1, 2, 3, 4, 5}, x, IdentityPreconditioner(5), {}, c);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(rep.half_step_exit);
    CHECK(x == Vector{1, 2, 3, 4, 5});
    CHECK(c.macs() == test::krylov_macs(KrylovMethod::Bicgstab, rep, 5, 5, 0));
}

TEST_CASE("solve MACs equal the recount from iteration counts")
{
    const auto mesh = build_mesh(17);
    const auto a = assemble(*mesh, grf_sample(benchmark_coefficient_spec(8), mesh)).stiffness;
    const auto n = static_cast<test::u64>(a.rows()), nnz = static_cast<test::u64>(a.nnz());
    std::mt19937_64 rng(23);
    const Vector b = test::random_vector(a.rows(), rng);
    const auto provider = make_basis_provider(BasisSpec::parse("geometric"), mesh->n(), 1);
    for (const auto m : kAll)
        for (const char* sm : {"jacobi", "gauss_seidel", "sor", "ssor", "chebyshev"})
            for (int levels = 0; levels <= 3; ++levels)
                for (const int restart : {5, 50}) {
                    CostCounter setup;
                    std::unique_ptr<Preconditioner> pc;
                    std::vector<LevelShape> shape;
                    const auto strategy = SmoothingStrategy::parse("2-1-3");
                    if (levels == 0) {
                        pc = std::make_unique<IdentityPreconditioner>(a.rows());
                    } else {
                        auto h = std::make_unique<HybridPreconditioner>(
                            build_hybrid(a, {levels, SmootherKind::parse(sm), strategy}, provider, setup));
                        shape = h->shape();
                        pc = std::move(h);
                    }
                    KrylovOptions opts;
                    opts.restart = restart;
                    Vector x(b.size(), 0.0);
                    CostCounter c;
                    const SolveReport rep = krylov_solve(m, a, b, x, *pc, opts, c);
                    CHECK(rep.macs == c.macs());
                    // CG with a nonsymmetric preconditioner may stall or break down; breakdowns are not recounted
                    if (rep.breakdown) {
                        CHECK(m == KrylovMethod::Cg);
                        continue;
                    }
                    CHECK((rep.converged || m == KrylovMethod::Cg));
                    const auto per_apply = test::hybrid_macs(shape, strategy.pre, strategy.post);
                    CHECK(c.macs() == test::krylov_macs(m, rep, nnz, n, per_apply));
                }
}
