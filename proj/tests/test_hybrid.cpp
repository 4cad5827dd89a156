#include "metasolve/hybrid_precond.hpp"
#include "metasolve/krylov.hpp"
#include "metasolve/sweep.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace metasolve;

namespace {

struct Fixture {
    std::shared_ptr<const StructuredMesh> mesh;
    SparseMatrix a;

    explicit Fixture(Index n = 17, std::uint64_t seed = 3) : mesh(build_mesh(n))
    {
        a = assemble(*mesh, grf_sample(benchmark_coefficient_spec(seed), mesh)).stiffness;
    }

    HybridPreconditioner build(int levels, const char* smoother, const char* strategy,
                               const std::string& basis = "geometric") const
    {
        CostCounter setup;
        const HybridOptions opts{levels, SmootherKind::parse(smoother), SmoothingStrategy::parse(strategy)};
        return build_hybrid(a, opts, make_basis_provider(BasisSpec::parse(basis), mesh->n(), 1), setup);
    }
};

Vector precondition(const Preconditioner& pc, const Vector& r)
{
    Vector z(r.size());
    CostCounter c;
    pc.apply(r, z, c);
    return z;
}

std::uint64_t smoother_cost(SmootherType t, std::uint64_t nnz, std::uint64_t n)
{
    switch (t) {
    case SmootherType::Jacobi: return nnz + 2 * n;
    case SmootherType::GaussSeidel: return nnz;
    case SmootherType::Sor: return nnz + n;
    case SmootherType::Ssor: return 2 * (nnz + n);
    default: return 0;
    }
}

// One application of the sandwich from `depth` down, from the level shapes alone.
std::uint64_t apply_cost(const std::vector<LevelShape>& shape, std::size_t depth, int s)
{
    const LevelShape& l = shape[depth];
    const auto n = static_cast<std::uint64_t>(l.size), nnz = static_cast<std::uint64_t>(l.nnz);
    std::uint64_t cost = 2 * static_cast<std::uint64_t>(s) * smoother_cost(l.smoother, nnz, n);
    if (l.coarse_size == 0) return cost;
    const auto nc = static_cast<std::uint64_t>(l.coarse_size);
    const bool deepest = depth + 2 == shape.size();
    cost += (nnz + n) + 2 * n * nc + n + (deepest ? nc * nc : apply_cost(shape, depth + 1, s));
    return cost;
}

}  // namespace

TEST_CASE("smoothing strategy strings")
{
    const auto s = SmoothingStrategy::parse("3-1-3");
    CHECK(s.pre == 3);
    CHECK(s.post == 3);
    CHECK(s.str() == "3-1-3");
    CHECK(SmoothingStrategy::parse("0-1-2").post == 2);
    CHECK_THROWS(SmoothingStrategy::parse("3-2-3"));
    CHECK_THROWS(SmoothingStrategy::parse("3-1"));
    CHECK_THROWS(SmoothingStrategy::parse("-1-1-1"));
    CHECK_THROWS(SmoothingStrategy::parse("1-1-1x"));
}

TEST_CASE("one level is pre- and post-smoothing only")
{
    const Fixture f;
    const auto pc = f.build(1, "ssor", "2-1-2");
    CHECK(pc.level_count() == 1);
    std::mt19937_64 rng(1);
    const Vector r = test::random_vector(f.a.rows(), rng);
    Vector expected(r.size(), 0.0);
    CostCounter c;
    relax_sweeps(SmootherKind::parse("ssor"), f.a, r, expected, 4, c);
    CHECK(test::max_abs_diff(precondition(pc, r), expected) <= 1e-14);
}

TEST_CASE("level chain of the benchmark mesh")
{
    const Fixture f(31);
    const auto pc = f.build(3, "gauss_seidel", "3-1-3");
    const auto shape = pc.shape();
    REQUIRE(shape.size() == 3);
    CHECK(shape[0].size == 841);
    CHECK(shape[1].size == 196);
    CHECK(shape[2].size == 16);
    CHECK(pc.level_count() == 3);
    CHECK_THROWS(f.build(4, "gauss_seidel", "1-1-1"));
}

TEST_CASE("linearity and zero input")
{
    const Fixture f;
    for (int levels = 1; levels <= 3; ++levels) {
        const auto pc = f.build(levels, "gauss_seidel", "3-1-3");
        const Vector zero(f.a.rows(), 0.0);
        CHECK(precondition(pc, zero) == zero);
        std::mt19937_64 rng(levels);
        const Vector r1 = test::random_vector(f.a.rows(), rng), r2 = test::random_vector(f.a.rows(), rng);
        const double alpha = 0.7, beta = -1.3;
        Vector mix(r1.size());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * r1[i] + beta * r2[i];
        const Vector z1 = precondition(pc, r1), z2 = precondition(pc, r2), zm = precondition(pc, mix);
        for (std::size_t i = 0; i < mix.size(); ++i) CHECK(std::abs(zm[i] - alpha * z1[i] - beta * z2[i]) <= 1e-11);
    }
}

TEST_CASE("Galerkin orthogonality and the coarse fixed point with 0-1-0")
{
    const Fixture f;
    const auto pc = f.build(2, "jacobi", "0-1-0", "geometric_qr");
    const DenseMatrix& p = pc.levels()[0].basis->matrix();
    std::mt19937_64 rng(2);
    const Vector r = test::random_vector(f.a.rows(), rng);
    const Vector z = precondition(pc, r);
    CostCounter c;
    Vector res(r.size()), pt(p.cols());
    residual(f.a, r, z, res, c);
    dense_multiply_transpose(p, res, pt, c);
    CHECK(test::norm(pt) <= 1e-10 * test::norm(r));

    Vector coeff = test::random_vector(p.cols(), rng), e(p.rows());
    dense_multiply(p, coeff, e, c);
    const Vector ae = spmv(f.a, e, c);
    CHECK(test::max_abs_diff(precondition(pc, ae), e) <= 1e-9);
}

TEST_CASE("symmetric smoothers give a symmetric preconditioner")
{
    const Fixture f;
    for (const char* sm : {"ssor", "chebyshev"}) {
        for (int levels = 2; levels <= 3; ++levels) {
            const auto pc = f.build(levels, sm, "2-1-2");
            std::mt19937_64 rng(levels);
            for (int t = 0; t < 5; ++t) {
                const Vector u = test::random_vector(f.a.rows(), rng), v = test::random_vector(f.a.rows(), rng);
                CHECK(std::abs(dot(precondition(pc, u), v) - dot(u, precondition(pc, v))) <=
                      1e-9 * test::norm(u) * test::norm(v));
            }
        }
    }
}

TEST_CASE("application cost follows the level shapes")
{
    const Fixture f(31);
    for (const char* sm : {"jacobi", "gauss_seidel", "sor", "ssor"})
        for (int levels = 1; levels <= 3; ++levels)
            for (const char* st : {"1-1-1", "5-1-5"}) {
                const auto pc = f.build(levels, sm, st);
                Vector z(f.a.rows());
                CostCounter c;
                pc.apply(Vector(f.a.rows(), 1.0), z, c);
                CHECK(c.macs() == apply_cost(pc.shape(), 0, SmoothingStrategy::parse(st).pre));
            }
}

TEST_CASE("basis dimension errors propagate")
{
    const Fixture f;
    CostCounter setup;
    const HybridOptions opts{2, SmootherKind::parse("jacobi"), SmoothingStrategy::parse("1-1-1")};
    const BasisProvider wrong = [](int, const SparseMatrix&) { return geometric_basis(*build_mesh(9), 5); };
    CHECK_THROWS_AS(build_hybrid(f.a, opts, wrong, setup), DimensionError);
}

TEST_CASE("two-level Gauss-Seidel 3-1-3 cuts BiCGStab iterations on the steady benchmark")
{
    const Fixture f(31, 42);
    const Vector b(f.a.rows(), 1.0);
    CostCounter c;
    Vector x0(b.size(), 0.0), x1(b.size(), 0.0);
    const IdentityPreconditioner none(f.a.rows());
    const SolveReport plain = bicgstab(f.a, b, x0, none, {}, c);
    const auto pc = f.build(2, "gauss_seidel", "3-1-3");
    const SolveReport hybrid = bicgstab(f.a, b, x1, pc, {}, c);
    REQUIRE(plain.converged);
    REQUIRE(hybrid.converged);
    MESSAGE("unpreconditioned " << plain.iterations << ", hybrid " << hybrid.iterations);
    CHECK(plain.iterations >= 3 * hybrid.iterations);
}
