#pragma once

#include "metasolve/hybrid_precond.hpp"
#include "metasolve/krylov.hpp"
#include "metasolve/mesh_fem.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace metasolve {

enum class Scheme { Imex, Newton };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

/// du/dt = div(k grad u) + s R(u) + f(x) phi(t) on [0,1]^2, u = 0 on the boundary,
/// with the Fisher reaction R(u) = u - u^2 scaled by s = reaction_scale.
struct RdProblem {
    RdProblem(std::shared_ptr<const StructuredMesh> m, ScalarField k, ScalarField f, ScalarField initial)
        : mesh(std::move(m)), k_field(std::move(k)), f_field(std::move(f)), u0(std::move(initial))
    {
    }

    std::shared_ptr<const StructuredMesh> mesh;
    ScalarField k_field;
    ScalarField f_field;
    ScalarField u0;
    double t_end = 1.0;
    double dt = 1.0 / 30.0;
    double theta = 1.0;
    double reaction_scale = 1.0;
    std::function<double(double)> forcing_time;  // phi(t); empty means phi = 1

    /// Throws std::invalid_argument when dt/t_end/theta or the fields are inconsistent.
    void validate() const;
    [[nodiscard]] int steps() const;
};

/// Standard benchmark: GRF coefficient and forcing, u0 = 0, h = dt = 1/(n-1).
RdProblem benchmark_problem(Index n, std::uint64_t seed, double theta = 1.0);

/// Explicit-term history, newest evaluation first.
class Ab3State {
public:
    void push(Vector g);
    [[nodiscard]] std::size_t size() const { return history_.size(); }
    [[nodiscard]] const Vector& at(std::size_t age) const { return history_.at(age); }

private:
    std::deque<Vector> history_;
};

/// Adams-Bashforth combination with startup ramp: AB1 at n = 0, AB2 at n = 1, AB3 from n = 2.
Vector ab3_combine(const Ab3State& state, int n);

/// Strategy for the linear systems produced by a time stepper.
class LinearSolveStrategy {
public:
    virtual ~LinearSolveStrategy() = default;
    /// Called whenever the system matrix changes; setup work is tallied into `counter`.
    virtual void prepare(const SparseMatrix& system, CostCounter& counter) = 0;
    virtual SolveReport solve(std::span<const double> b, std::span<double> x, CostCounter& counter) = 0;
    /// Structure of the current preconditioner (empty for unpreconditioned or direct solves).
    [[nodiscard]] virtual std::vector<LevelShape> shape() const { return {}; }
    [[nodiscard]] virtual std::size_t bytes() const { return 0; }
};

/// Dense LU of every system; reports zero iterations.
class DirectStrategy final : public LinearSolveStrategy {
public:
    void prepare(const SparseMatrix& system, CostCounter& counter) override;
    SolveReport solve(std::span<const double> b, std::span<double> x, CostCounter& counter) override;
    [[nodiscard]] std::size_t bytes() const override;

private:
    std::optional<LuFactorization> lu_;
};

/// Krylov method with an optional hybrid preconditioner.
class MetaSolverStrategy final : public LinearSolveStrategy {
public:
    /// hybrid = nullopt means unpreconditioned.
    MetaSolverStrategy(KrylovMethod method, KrylovOptions options, std::optional<HybridOptions> hybrid,
                       BasisProvider bases);

    void prepare(const SparseMatrix& system, CostCounter& counter) override;
    SolveReport solve(std::span<const double> b, std::span<double> x, CostCounter& counter) override;
    [[nodiscard]] std::vector<LevelShape> shape() const override;
    [[nodiscard]] std::size_t bytes() const override;

    [[nodiscard]] const Preconditioner* preconditioner() const { return pc_.get(); }

private:
    KrylovMethod method_;
    KrylovOptions options_;
    std::optional<HybridOptions> hybrid_;
    BasisProvider bases_;
    std::optional<SparseMatrix> system_;
    std::unique_ptr<Preconditioner> pc_;
};

/// Raised when a linear solve or a Newton iteration fails; carries the step index.
class StepFailure : public std::runtime_error {
public:
    StepFailure(int step, const std::string& what, std::vector<double> trace = {})
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step), trace_(std::move(trace))
    {
    }
    [[nodiscard]] int step() const { return step_; }
    [[nodiscard]] const std::vector<double>& residual_trace() const { return trace_; }

private:
    int step_;
    std::vector<double> trace_;
};

struct RunResult {
    explicit RunResult(ScalarField initial) : final_state(std::move(initial)) {}

    ScalarField final_state;
    SolveReport aggregate;  // iterations, macs, wall time summed over all linear solves
    std::vector<SolveReport> solves;
    std::vector<std::vector<LevelShape>> solve_shapes;  // preconditioner structure used by each solve
    std::vector<std::vector<double>> newton_traces;     // per step: ||F_0||, ||F_1||, ...
    std::vector<ScalarField> trajectory;                // filled when requested
    int linear_solves = 0;
    double setup_seconds = 0.0;
    std::uint64_t setup_macs = 0;
    std::size_t peak_bytes = 0;
    double wall_seconds = 0.0;
};

struct RunOptions {
    bool keep_trajectory = false;
    double newton_tol = 1e-10;
    int newton_maxit = 25;
};

/// (M + theta dt K) U^{n+1} = (M - (1-theta) dt K) U^n + dt AB(G), system matrix fixed,
/// preconditioner built once and reused.
RunResult imex_run(const RdProblem& problem, LinearSolveStrategy& strategy, const RunOptions& options = {});

/// Newton also stops once ||F|| <= factor * eps * (||M u|| + theta dt ||K u - G(u)|| + ||rhs||),
/// the rounding level of the residual evaluation.
inline constexpr double kNewtonRoundoffFactor = 64.0;

/// theta-scheme residual driven to ||F|| <= newton_tol ||F_0|| each step; the Jacobian and
/// its preconditioner are rebuilt at every Newton iteration.
RunResult newton_run(const RdProblem& problem, LinearSolveStrategy& strategy, const RunOptions& options = {});

RunResult run_scheme(Scheme scheme, const RdProblem& problem, LinearSolveStrategy& strategy,
                     const RunOptions& options = {});

/// The same scheme with every linear system solved by dense LU.
RunResult reference_solve(Scheme scheme, const RdProblem& problem, const RunOptions& options = {});

/// ||u - u_ref||_2 / ||u_ref||_2 over nodal values (zero reference gives the absolute norm).
double relative_error(const ScalarField& u, const ScalarField& reference);

}  // namespace metasolve
