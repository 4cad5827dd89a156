#pragma once

#include "metasolve/moo.hpp"
#include "metasolve/timestep.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace metasolve {

/// Coarse-basis provider tag:
///   geometric | geometric_qr | random_qr:<sweeps> | file:<path>
struct BasisSpec {
    BasisKind kind = BasisKind::Geometric;
    bool orthonormal = false;  // geometric_qr
    int sweeps = 0;            // random_qr smoothing sweeps
    std::string path;          // file basis (level 2 only)

    static BasisSpec parse(const std::string& tag);
    [[nodiscard]] std::string tag() const;
};

/// Provider for one run. Bases are built on first request per level and then reused, so a
/// Newton run pays for each basis once. Coarse sizes follow geometric_coarse_chain(fine_n, 2)
/// for every kind; random bases at depth d use seed + d.
BasisProvider make_basis_provider(const BasisSpec& spec, Index fine_n, std::uint64_t seed);

struct MetaSolverConfig {
    std::int64_t id = 0;
    BasisSpec basis;
    KrylovMethod krylov = KrylovMethod::Bicgstab;
    SmootherKind smoother;
    SmoothingStrategy strategy;
    int levels = 2;
    Scheme scheme = Scheme::Imex;

    /// CG with a nonsymmetric preconditioner (Gauss-Seidel or SOR sweeps): allowed, but CG theory is void.
    [[nodiscard]] bool nonsymmetric_cg() const;
    [[nodiscard]] HybridOptions hybrid_options() const;
    [[nodiscard]] std::string describe() const;
};

struct ProblemSpec {
    Index n = 31;
    double dt = 0.0;  // 0 means h = 1/(n-1)
    double t_end = 1.0;
    double theta = 1.0;
    double reaction_scale = 1.0;
    GrfSpec k = {1.0, 0.3, 0.1, 0.1, 0};
    GrfSpec f = {0.0, 1.0, 0.1, -std::numeric_limits<double>::infinity(), 0};
};

/// Coefficient drawn with `seed`, forcing with seed + 1; u0 = 0.
RdProblem make_problem(const ProblemSpec& spec, std::uint64_t seed);

enum class TimingMode { Sequential, Parallel };

/// Flat "key = value" text; '#' starts a comment; axis keys take comma-separated lists.
///
///   n, dt, t_end, theta, reaction_scale
///   k_mean, k_sigma, k_corr_len, k_floor, f_mean, f_sigma, f_corr_len
///   tol, maxit, restart, omega, cheb_ratio
///   basis, krylov, smoother, strategy, levels, scheme      (axes)
///   seed, output, mode = sequential|parallel, threads
struct SweepManifest {
    ProblemSpec problem;
    std::vector<std::string> basis = {"geometric"};
    std::vector<std::string> krylov = {"bicgstab"};
    std::vector<std::string> smoother = {"gauss_seidel"};
    std::vector<std::string> strategy = {"3-1-3"};
    std::vector<int> levels = {2};
    std::vector<std::string> scheme = {"imex"};
    KrylovOptions krylov_options;
    double omega = 1.5;
    double cheb_ratio = 30.0;
    std::uint64_t seed = 42;
    std::string output = "results.csv";
    TimingMode mode = TimingMode::Sequential;
    unsigned threads = 0;  // 0: hardware concurrency

    /// `base_dir` resolves relative file-basis paths. Throws std::invalid_argument on bad input.
    static SweepManifest parse(const std::string& text, const std::string& base_dir = "",
                               std::uint64_t default_seed = 42);
    static SweepManifest load(const std::string& path, std::uint64_t default_seed = 42);
    /// Every axis value is checked; empty axes are rejected.
    void validate() const;
};

/// Cartesian product, scheme outermost, then basis, krylov, smoother, strategy, levels
/// (levels varies fastest). Ids count from 0 in this order.
std::vector<MetaSolverConfig> enumerate_configs(const SweepManifest& manifest);

/// One line of the results file.
struct SweepRow {
    std::int64_t config_id = 0;
    std::string basis;
    std::string krylov;
    std::string smoother;
    std::string strategy;
    int levels = 0;
    std::string scheme;
    bool converged = false;
    std::optional<PerformanceVector> perf;  // absent for failed runs
    std::optional<double> ave_macs;
    std::uint64_t seed = 0;

    /// All columns except wall_seconds and setup_seconds agree exactly.
    [[nodiscard]] bool same_deterministic_columns(const SweepRow& other) const;
};

inline const char* const kResultsHeader =
    "config_id,basis,krylov,smoother,strategy,levels,scheme,converged,rel_error,wall_seconds,iterations,"
    "peak_megabytes,macs,setup_seconds,ave_macs,seed";

void write_results_header(std::ostream& out);
void write_results_row(std::ostream& out, const SweepRow& row);
std::vector<SweepRow> read_results_csv(std::istream& in);
std::vector<SweepRow> read_results_file(const std::string& path);

/// Direct-solver trajectory each configuration is compared against.
struct Reference {
    Scheme scheme = Scheme::Imex;
    std::vector<ScalarField> trajectory;
};

Reference make_reference(Scheme scheme, const RdProblem& problem);

/// Largest relative error over the time levels of two trajectories.
double trajectory_error(const std::vector<ScalarField>& run, const std::vector<ScalarField>& reference);

struct ConfigRun {
    SweepRow row;
    std::optional<RunResult> result;  // absent when the run failed
    std::string failure;
};

/// Runs one configuration; solver failures are captured in the row, not thrown.
ConfigRun run_config(const MetaSolverConfig& config, const RdProblem& problem, const Reference& reference,
                     const KrylovOptions& options, std::uint64_t seed);

struct SweepSummary {
    std::size_t runs = 0;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;  // "config <id>: <reason>"
    std::vector<SweepRow> rows;
};

/// Runs every configuration and writes the results file through a single writer, in id order.
/// In parallel mode a comment line marks wall times as contended. Output I/O errors throw.
SweepSummary run_sweep(const SweepManifest& manifest, std::ostream& out);
SweepSummary run_sweep(const SweepManifest& manifest);  // writes manifest.output

}  // namespace metasolve
