#include "metasolve/timestep.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace metasolve {

Scheme parse_scheme(const std::string& name)
{
    if (name == "imex") return Scheme::Imex;
    if (name == "newton") return Scheme::Newton;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected imex|newton)");
}

std::string scheme_name(Scheme scheme) { return scheme == Scheme::Imex ? "imex" : "newton"; }

void RdProblem::validate() const
{
    if (!mesh) throw std::invalid_argument("RdProblem: no mesh");
    for (const ScalarField* f : {&k_field, &f_field, &u0})
        if (f->mesh.get() != mesh.get() && f->mesh->n() != mesh->n())
            throw std::invalid_argument("RdProblem: field does not live on the problem mesh");
    if (!(dt > 0.0)) throw std::invalid_argument("RdProblem: dt must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("RdProblem: t_end must be positive");
    const double ratio = t_end / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("RdProblem: t_end must be a positive multiple of dt");
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("RdProblem: theta must lie in (0, 1]");
}

int RdProblem::steps() const { return static_cast<int>(std::lround(t_end / dt)); }

RdProblem benchmark_problem(Index n, std::uint64_t seed, double theta)
{
    auto mesh = build_mesh(n);
    const GrfSampler k_sampler(benchmark_coefficient_spec(seed), mesh);
    const GrfSampler f_sampler(benchmark_forcing_spec(seed), mesh);
    RdProblem p(mesh, k_sampler.sample(), f_sampler.sample(), ScalarField(mesh, 0.0));
    p.t_end = 1.0;
    p.dt = mesh->h();
    p.theta = theta;
    return p;
}

void Ab3State::push(Vector g)
{
    history_.push_front(std::move(g));
    if (history_.size() > 3) history_.pop_back();
}

Vector ab3_combine(const Ab3State& state, int n)
{
    if (n < 0) throw std::invalid_argument("ab3_combine: negative step index");
    const std::size_t needed = static_cast<std::size_t>(std::min(n, 2)) + 1;
    if (state.size() < needed)
        throw std::invalid_argument("ab3_combine: step " + std::to_string(n) + " needs " + std::to_string(needed) +
                                    " stored evaluations, have " + std::to_string(state.size()));
    const Vector& g0 = state.at(0);
    Vector out(g0.size());
    if (n == 0) {
        out = g0;
    } else if (n == 1) {
        const Vector& g1 = state.at(1);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.5 * g0[i] - 0.5 * g1[i];
    } else {
        const Vector& g1 = state.at(1);
        const Vector& g2 = state.at(2);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (23.0 * g0[i] - 16.0 * g1[i] + 5.0 * g2[i]) / 12.0;
    }
    return out;
}

void DirectStrategy::prepare(const SparseMatrix& system, CostCounter& counter)
{
    lu_.emplace(DenseMatrix::from_sparse(system), counter);
}

SolveReport DirectStrategy::solve(std::span<const double> b, std::span<double> x, CostCounter& counter)
{
    if (!lu_) throw std::logic_error("DirectStrategy: solve before prepare");
    SolveReport report;
    const std::uint64_t macs0 = counter.macs();
    const auto start = std::chrono::steady_clock::now();
    lu_->solve(b, x, counter);
    report.converged = true;
    report.residual_history.push_back(0.0);
    report.macs = counter.macs() - macs0;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.peak_bytes = counter.peak_bytes();
    return report;
}

std::size_t DirectStrategy::bytes() const { return lu_ ? lu_->bytes() : 0; }

MetaSolverStrategy::MetaSolverStrategy(KrylovMethod method, KrylovOptions options, std::optional<HybridOptions> hybrid,
                                       BasisProvider bases)
    : method_(method), options_(options), hybrid_(std::move(hybrid)), bases_(std::move(bases))
{
}

void MetaSolverStrategy::prepare(const SparseMatrix& system, CostCounter& counter)
{
    system_ = system;
    if (hybrid_)
        pc_ = std::make_unique<HybridPreconditioner>(build_hybrid(system, *hybrid_, bases_, counter));
    else
        pc_ = std::make_unique<IdentityPreconditioner>(system.rows());
}

SolveReport MetaSolverStrategy::solve(std::span<const double> b, std::span<double> x, CostCounter& counter)
{
    if (!system_ || !pc_) throw std::logic_error("MetaSolverStrategy: solve before prepare");
    return krylov_solve(method_, *system_, b, x, *pc_, options_, counter);
}

std::vector<LevelShape> MetaSolverStrategy::shape() const
{
    if (const auto* hybrid = dynamic_cast<const HybridPreconditioner*>(pc_.get())) return hybrid->shape();
    return {};
}

std::size_t MetaSolverStrategy::bytes() const
{
    return (system_ ? system_->bytes() : 0) + (pc_ ? pc_->bytes() : 0);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// Interior-node discretization shared by both steppers.
class Discretization {
public:
    explicit Discretization(const RdProblem& problem) : problem_(problem)
    {
        problem.validate();
        fem_ = assemble(*problem.mesh, problem.k_field);
        CostCounter scratch;
        const Vector full_load = spmv(fem_.mass_full, problem.f_field.values, scratch);
        load_.reserve(static_cast<std::size_t>(problem.mesh->interior_count()));
        for (const Index node : problem.mesh->interior_nodes()) load_.push_back(full_load[node]);
    }

    [[nodiscard]] const FemSystem& fem() const { return fem_; }
    [[nodiscard]] std::size_t size() const { return load_.size(); }

    /// G(U, t) = s * M_L (U - U^2) + phi(t) M f
    [[nodiscard]] Vector explicit_term(std::span<const double> u, double t, CostCounter& counter) const
    {
        const double phi = problem_.forcing_time ? problem_.forcing_time(t) : 1.0;
        Vector g(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            g[i] = problem_.reaction_scale * fem_.lumped_mass[i] * (u[i] - u[i] * u[i]) + phi * load_[i];
        counter.add_macs(3 * u.size());
        return g;
    }

    /// Diagonal of dG/dU.
    [[nodiscard]] Vector explicit_jacobian(std::span<const double> u) const
    {
        Vector d(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            d[i] = problem_.reaction_scale * fem_.lumped_mass[i] * (1.0 - 2.0 * u[i]);
        return d;
    }

private:
    const RdProblem& problem_;
    FemSystem fem_;
    Vector load_;
};

SparseMatrix diagonal_matrix(std::span<const double> d)
{
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({static_cast<Index>(i), static_cast<Index>(i), d[i]});
    return SparseMatrix::from_triplets(static_cast<Index>(d.size()), static_cast<Index>(d.size()), std::move(t));
}

// Prepares the strategy and books its time, MACs and memory onto the run.
class SetupBooking {
public:
    SetupBooking(LinearSolveStrategy& strategy, RunResult& result, CostCounter& counter)
        : strategy_(strategy), result_(result), counter_(counter)
    {
    }
    ~SetupBooking() { counter_.release(held_); }
    SetupBooking(const SetupBooking&) = delete;
    SetupBooking& operator=(const SetupBooking&) = delete;

    void prepare(const SparseMatrix& system)
    {
        counter_.release(held_);
        const auto start = Clock::now();
        const std::uint64_t macs0 = counter_.macs();
        strategy_.prepare(system, counter_);
        result_.setup_seconds += seconds_since(start);
        result_.setup_macs += counter_.macs() - macs0;
        held_ = strategy_.bytes();
        counter_.allocate(held_);
    }

private:
    LinearSolveStrategy& strategy_;
    RunResult& result_;
    CostCounter& counter_;
    std::size_t held_ = 0;
};

void record_solve(RunResult& result, const SolveReport& report, const LinearSolveStrategy& strategy)
{
    result.solves.push_back(report);
    result.solve_shapes.push_back(strategy.shape());
    result.linear_solves += 1;
    result.aggregate.iterations += report.iterations;
    result.aggregate.macs += report.macs;
    result.aggregate.wall_seconds += report.wall_seconds;
    result.aggregate.breakdown = result.aggregate.breakdown || report.breakdown;
    result.aggregate.final_relative_residual = report.final_relative_residual;
}

RunResult start_result(const RdProblem& problem, bool keep)
{
    RunResult result(problem.u0);
    result.aggregate.converged = true;
    if (keep) result.trajectory.push_back(problem.u0);
    return result;
}

}  // namespace

RunResult imex_run(const RdProblem& problem, LinearSolveStrategy& strategy, const RunOptions& options)
{
    const auto start = Clock::now();
    RunResult result = start_result(problem, options.keep_trajectory);
    CostCounter counter;
    const Discretization disc(problem);
    const auto& fem = disc.fem();
    const std::size_t n = disc.size();
    const double dt = problem.dt;
    const double theta = problem.theta;

    const SparseMatrix system = SparseMatrix::add(1.0, fem.mass, theta * dt, fem.stiffness);
    const ScopedBytes matrices(counter, system.bytes() + fem.mass.bytes() + fem.stiffness.bytes() +
                                            6 * vector_bytes(n));
    SetupBooking setup(strategy, result, counter);
    setup.prepare(system);

    Vector u = problem.u0.interior_values();
    Vector rhs(n), ku(n);
    Ab3State history;
    for (int step = 0; step < problem.steps(); ++step) {
        const double t = step * dt;
        history.push(disc.explicit_term(u, t, counter));
        const Vector ab = ab3_combine(history, step);
        spmv(fem.mass, u, rhs, counter);
        spmv(fem.stiffness, u, ku, counter);
        axpy(-(1.0 - theta) * dt, ku, rhs, counter);
        axpy(dt, ab, rhs, counter);

        Vector x = u;
        const SolveReport report = strategy.solve(rhs, x, counter);
        record_solve(result, report, strategy);
        if (!report.converged) {
            std::ostringstream msg;
            msg << "linear solve did not converge (relative residual " << report.final_relative_residual << " after "
                << report.iterations << " iterations" << (report.breakdown ? ", breakdown" : "") << ")";
            throw StepFailure(step, msg.str());
        }
        u = std::move(x);
        if (options.keep_trajectory) result.trajectory.push_back(ScalarField::from_interior(problem.mesh, u));
    }
    result.final_state = ScalarField::from_interior(problem.mesh, u);
    result.peak_bytes = counter.peak_bytes();
    result.aggregate.peak_bytes = counter.peak_bytes();
    result.wall_seconds = seconds_since(start);
    return result;
}

RunResult newton_run(const RdProblem& problem, LinearSolveStrategy& strategy, const RunOptions& options)
{
    const auto start = Clock::now();
    RunResult result = start_result(problem, options.keep_trajectory);
    CostCounter counter;
    const Discretization disc(problem);
    const auto& fem = disc.fem();
    const std::size_t n = disc.size();
    const double dt = problem.dt;
    const double theta = problem.theta;

    const SparseMatrix base = SparseMatrix::add(1.0, fem.mass, theta * dt, fem.stiffness);
    const ScopedBytes matrices(counter, 2 * base.bytes() + fem.mass.bytes() + fem.stiffness.bytes() +
                                            8 * vector_bytes(n));
    SetupBooking setup(strategy, result, counter);

    Vector u = problem.u0.interior_values();
    Vector explicit_part(n), residual_vec(n), tmp(n);
    for (int step = 0; step < problem.steps(); ++step) {
        const double t0 = step * dt;
        const double t1 = (step + 1) * dt;
        // explicit_part = M u^n - (1 - theta) dt (K u^n - G(u^n))
        const Vector g_old = disc.explicit_term(u, t0, counter);
        spmv(fem.mass, u, explicit_part, counter);
        spmv(fem.stiffness, u, tmp, counter);
        axpy(-1.0, g_old, tmp, counter);
        axpy(-(1.0 - theta) * dt, tmp, explicit_part, counter);

        std::vector<double> trace;
        for (int it = 0;; ++it) {
            // F(u) = M u + theta dt (K u - G(u)) - explicit_part
            const Vector g_new = disc.explicit_term(u, t1, counter);
            spmv(fem.mass, u, residual_vec, counter);
            spmv(fem.stiffness, u, tmp, counter);
            axpy(-1.0, g_new, tmp, counter);
            // Below `floor` the residual is rounding noise from the cancellation of its terms.
            const double floor = kNewtonRoundoffFactor * std::numeric_limits<double>::epsilon() *
                                 (norm2(residual_vec) + theta * dt * norm2(tmp) + norm2(explicit_part));
            axpy(theta * dt, tmp, residual_vec, counter);
            axpy(-1.0, explicit_part, residual_vec, counter);
            const double fnorm = norm2(residual_vec, counter);
            trace.push_back(fnorm);
            if (fnorm <= std::max(options.newton_tol * trace.front(), floor)) break;
            if (it == options.newton_maxit)
                throw StepFailure(step, "Newton did not converge in " + std::to_string(options.newton_maxit) +
                                            " iterations",
                                  trace);

            const SparseMatrix jacobian =
                SparseMatrix::add(1.0, base, -theta * dt, diagonal_matrix(disc.explicit_jacobian(u)));
            setup.prepare(jacobian);
            for (auto& v : residual_vec) v = -v;
            Vector delta(n, 0.0);
            const SolveReport report = strategy.solve(residual_vec, delta, counter);
            record_solve(result, report, strategy);
            if (!report.converged) {
                std::ostringstream msg;
                msg << "linear solve in Newton iteration " << it << " did not converge (relative residual "
                    << report.final_relative_residual << (report.breakdown ? ", breakdown" : "") << ")";
                throw StepFailure(step, msg.str(), trace);
            }
            for (std::size_t i = 0; i < n; ++i) u[i] += delta[i];
        }
        result.newton_traces.push_back(std::move(trace));
        if (options.keep_trajectory) result.trajectory.push_back(ScalarField::from_interior(problem.mesh, u));
    }
    result.final_state = ScalarField::from_interior(problem.mesh, u);
    result.peak_bytes = counter.peak_bytes();
    result.aggregate.peak_bytes = counter.peak_bytes();
    result.wall_seconds = seconds_since(start);
    return result;
}

RunResult run_scheme(Scheme scheme, const RdProblem& problem, LinearSolveStrategy& strategy, const RunOptions& options)
{
    return scheme == Scheme::Imex ? imex_run(problem, strategy, options) : newton_run(problem, strategy, options);
}

RunResult reference_solve(Scheme scheme, const RdProblem& problem, const RunOptions& options)
{
    DirectStrategy direct;
    return run_scheme(scheme, problem, direct, options);
}

double relative_error(const ScalarField& u, const ScalarField& reference)
{
    if (u.values.size() != reference.values.size()) throw DimensionError("relative_error: field size mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double d = u.values[i] - reference.values[i];
        num += d * d;
        den += reference.values[i] * reference.values[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace metasolve
