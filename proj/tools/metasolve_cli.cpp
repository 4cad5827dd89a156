#include "metasolve/sweep.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace metasolve;

namespace {

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("METASOLVE_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring unparsable METASOLVE_SEED='" << env << "'\n";
        }
    }
    return 42;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.precision(17);
    return out;
}

ParetoFront load_front(const std::string& path)
{
    FrontImport imported = read_front_csv_file(path);
    if (imported.records.empty()) throw std::runtime_error("'" + path + "' holds no converged rows");
    if (imported.skipped > 0) std::cerr << "note: skipped " << imported.skipped << " failed row(s)\n";
    return ParetoFront(std::move(imported.records));
}

int cmd_sweep(const std::string& manifest_path, const std::string& output, bool parallel, unsigned threads)
{
    SweepManifest manifest = SweepManifest::load(manifest_path, default_seed());
    if (!output.empty()) manifest.output = output;
    if (parallel) manifest.mode = TimingMode::Parallel;
    if (threads > 0) manifest.threads = threads;
    const SweepSummary summary = run_sweep(manifest);
    for (const auto& msg : summary.failure_messages) std::cerr << "failed " << msg << '\n';
    std::cout << summary.runs << (summary.runs == 1 ? " run, " : " runs, ") << summary.failures
              << (summary.failures == 1 ? " failure" : " failures") << " -> " << manifest.output << '\n';
    return 0;
}

struct SolveArgs {
    Index n = 31;
    std::uint64_t seed = 0;
    std::string scheme = "imex";
    std::string basis = "geometric";
    std::string krylov = "bicgstab";
    std::string smoother = "gauss_seidel";
    std::string strategy = "3-1-3";
    int levels = 2;
    double theta = 1.0;
    double dt = 0.0;
    double t_end = 1.0;
    double tol = 1e-12;
    int maxit = 10000;
    bool unpreconditioned = false;
    std::string field_out;
};

int cmd_solve(const SolveArgs& a)
{
    ProblemSpec spec;
    spec.n = a.n;
    spec.theta = a.theta;
    spec.dt = a.dt;
    spec.t_end = a.t_end;
    const RdProblem problem = make_problem(spec, a.seed);
    MetaSolverConfig config;
    config.basis = BasisSpec::parse(a.basis);
    config.krylov = parse_krylov(a.krylov);
    config.smoother = SmootherKind::parse(a.smoother);
    config.strategy = SmoothingStrategy::parse(a.strategy);
    config.levels = a.levels;
    config.scheme = parse_scheme(a.scheme);
    KrylovOptions options;
    options.tol = a.tol;
    options.maxit = a.maxit;

    const Reference reference = make_reference(config.scheme, problem);
    if (config.nonsymmetric_cg()) std::cerr << "note: CG with a nonsymmetric preconditioner\n";

    if (a.unpreconditioned) {
        MetaSolverStrategy strategy(config.krylov, options, std::nullopt, {});
        RunOptions ro;
        ro.keep_trajectory = true;
        const RunResult r = run_scheme(config.scheme, problem, strategy, ro);
        std::cout << "unpreconditioned " << krylov_name(config.krylov) << ": iterations " << r.aggregate.iterations
                  << ", macs " << r.aggregate.macs << ", rel_error " << std::setprecision(3)
                  << trajectory_error(r.trajectory, reference.trajectory) << '\n';
        if (!a.field_out.empty()) {
            auto out = open_output(a.field_out);
            write_field_csv(out, r.final_state);
        }
        return 0;
    }
    const ConfigRun run = run_config(config, problem, reference, options, a.seed);
    if (!run.row.converged) {
        std::cerr << "error: " << run.failure << '\n';
        return 1;
    }
    write_results_header(std::cout);
    write_results_row(std::cout, run.row);
    if (!a.field_out.empty()) {
        auto out = open_output(a.field_out);
        write_field_csv(out, run.result->final_state);
    }
    return 0;
}

int cmd_pareto(const std::string& results, const std::string& projection, const std::string& prefix)
{
    std::vector<std::size_t> axes;
    std::stringstream in(projection);
    std::string name;
    while (std::getline(in, name, ',')) axes.push_back(criterion_index(name));
    if (axes.size() != 3) throw std::invalid_argument("projection needs exactly 3 criterion names");

    const ParetoFront front = load_front(results);
    std::vector<PerformanceRecord> members;
    for (const auto i : front.pareto_indices()) members.push_back(front.records()[i]);
    {
        auto out = open_output(prefix + "_pareto.csv");
        write_front_csv(out, members);
    }
    auto out = open_output(prefix + "_projection.csv");
    const Rescaled& rs = front.rescaled();
    for (const auto ax : axes)
        if (rs.degenerate[ax]) out << "# degenerate criterion: " << kCriterionNames[ax] << " is constant over the front\n";
    out << "config_id";
    for (const auto ax : axes) out << ',' << kCriterionNames[ax];
    out << '\n';
    for (const auto& m : members) {
        const auto p = m.perf.as_point();
        out << m.config_id;
        for (const auto ax : axes) out << ',' << p[ax];
        out << '\n';
    }
    std::cout << members.size() << " Pareto member(s) of " << front.records().size() << " -> " << prefix
              << "_pareto.csv, " << prefix << "_projection.csv\n";
    return 0;
}

int cmd_prefer(const std::string& results, const std::string& weights_text, std::size_t k)
{
    const PreferenceWeights weights = PreferenceWeights::parse(weights_text);
    if (weights.size() != kCriteria)
        throw std::invalid_argument("weights need " + std::to_string(kCriteria) + " entries");
    const ParetoFront front = load_front(results);
    const RankResult ranked = preference_rank(front, weights, k);
    if (ranked.clamped)
        std::cerr << "warning: k = " << k << " exceeds the front size " << front.pareto_indices().size()
                  << "; listing the whole front\n";
    std::cout << "rank,config_id";
    for (const auto& n : kCriterionNames) std::cout << ',' << n;
    for (const auto& n : kCriterionNames) std::cout << ",r_" << n;
    std::cout << ",score\n" << std::setprecision(10);
    int rank = 1;
    for (const auto& m : ranked.top) {
        const auto& rec = front.records()[front.pareto_indices()[m.member]];
        const auto raw = rec.perf.as_point();
        std::cout << rank++ << ',' << m.id;
        for (const double v : raw) std::cout << ',' << v;
        for (const double v : front.rescaled().values[m.member]) std::cout << ',' << v;
        std::cout << ',' << m.score << '\n';
    }
    return 0;
}

int cmd_rediscover(const std::string& results, std::int64_t id)
{
    const ParetoFront front = load_front(results);
    const auto pos = front.member_position(id);
    if (pos < 0) {
        if (front.contains_id(id))
            std::cerr << "error: config " << id << " is dominated, so no weights can select it\n";
        else
            std::cerr << "error: unknown config id " << id << '\n';
        return 2;
    }
    const RediscoverResult r = rediscover(front.rescaled().values, static_cast<std::size_t>(pos));
    if (r.status == LpStatus::Infeasible) {
        std::cout << "config " << id << ": infeasible (nonconvex region)\n";
        return 0;
    }
    if (r.status == LpStatus::NumericalFailure) {
        std::cerr << "error: LP numerical failure: " << r.message << '\n';
        return 1;
    }
    std::cout << "config " << id << ": weights\n" << std::setprecision(12);
    for (std::size_t i = 0; i < kCriteria; ++i)
        std::cout << "  lambda" << i + 1 << " (" << kCriterionNames[i] << ") = " << r.lambda[i] << '\n';
    const PreferenceWeights found = PreferenceWeights::normalized(r.lambda);
    const RankResult top = preference_rank(front, found, 1);
    const double gap = found.score(front.rescaled().values[static_cast<std::size_t>(pos)]) - top.top[0].score;
    std::cout << "verification: preference_rank top-1 = config " << top.top[0].id;
    if (top.top[0].id == id)
        std::cout << " (target)\n";
    else
        std::cout << " (tie, score gap " << gap << ")\n";
    return gap <= kTieTolerance ? 0 : 1;
}

int cmd_grf(Index n, double mean, double sigma, double corr_len, double floor, std::uint64_t seed,
            const std::string& out_path)
{
    auto mesh = build_mesh(n);
    const ScalarField field = grf_sample({mean, sigma, corr_len, floor, seed}, mesh);
    if (out_path.empty()) {
        std::cout.precision(17);
        write_field_csv(std::cout, field);
    } else {
        auto out = open_output(out_path);
        write_field_csv(out, field);
        std::cout << field.values.size() << " values -> " << out_path << '\n';
    }
    return 0;
}

int cmd_mesh_info(Index n)
{
    auto mesh = build_mesh(n);
    const FemSystem fem = assemble(*mesh, ScalarField(mesh, 1.0));
    std::cout << "n = " << n << ", h = " << mesh->h() << '\n'
              << "nodes = " << mesh->node_count() << ", interior = " << mesh->interior_count()
              << ", triangles = " << mesh->triangles().size() << '\n'
              << "interior stiffness nnz = " << fem.stiffness.nnz() << '\n';
    std::cout << "geometric coarse levels:";
    try {
        for (const Index c : geometric_coarse_chain(n, 2)) std::cout << ' ' << c << " (" << (c - 2) * (c - 2) << " interior)";
    } catch (const std::invalid_argument& e) {
        std::cout << " (" << e.what() << ")";
    }
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Meta-solver sweeps and multi-objective analysis for reaction-diffusion benchmarks"};
    app.require_subcommand(1);

    std::string manifest, output, results, projection = "wall_seconds,rel_error,peak_megabytes", prefix = "front";
    std::string weights, grf_out;
    bool parallel = false;
    unsigned threads = 0;
    std::size_t k = 5;
    std::int64_t config_id = 0;

    auto* sweep = app.add_subcommand("sweep", "Run every configuration of a manifest");
    sweep->add_option("manifest", manifest, "Manifest file")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--output", output, "Results CSV (overrides the manifest)");
    sweep->add_flag("--parallel", parallel, "Run configurations on worker threads (timings marked contended)");
    sweep->add_option("--threads", threads, "Worker threads in parallel mode");

    SolveArgs solve_args;
    solve_args.seed = default_seed();
    auto* solve = app.add_subcommand("solve", "Run one meta-solver on the benchmark and print its results row");
    solve->add_option("--n", solve_args.n, "Grid points per side")->check(CLI::Range(3, 200));
    solve->add_option("--seed", solve_args.seed, "GRF seed (default $METASOLVE_SEED or 42)");
    solve->add_option("--scheme", solve_args.scheme, "imex|newton");
    solve->add_option("--basis", solve_args.basis, "geometric|geometric_qr|random_qr:<sweeps>|file:<path>");
    solve->add_option("--krylov", solve_args.krylov, "cg|fgmres|bicgstab");
    solve->add_option("--smoother", solve_args.smoother, "jacobi|gauss_seidel|sor|ssor|chebyshev");
    solve->add_option("--strategy", solve_args.strategy, "s-1-s");
    solve->add_option("--levels", solve_args.levels, "1|2|3")->check(CLI::Range(1, 3));
    solve->add_option("--theta", solve_args.theta, "0.5 = Crank-Nicolson, 1 = backward Euler");
    solve->add_option("--dt", solve_args.dt, "Time step (default h)");
    solve->add_option("--t-end", solve_args.t_end, "Final time");
    solve->add_option("--tol", solve_args.tol, "Relative residual tolerance");
    solve->add_option("--maxit", solve_args.maxit, "Iteration cap per linear solve");
    solve->add_flag("--unpreconditioned", solve_args.unpreconditioned, "Plain Krylov, no hybrid preconditioner");
    solve->add_option("--field-out", solve_args.field_out, "Write the final field as x,y,value CSV");

    auto* pareto = app.add_subcommand("pareto", "Extract the Pareto front and a 3-criterion projection");
    pareto->add_option("results", results, "Results CSV")->required()->check(CLI::ExistingFile);
    pareto->add_option("--projection", projection, "Three criterion names, comma separated");
    pareto->add_option("--prefix", prefix, "Output prefix for <prefix>_pareto.csv and <prefix>_projection.csv");

    auto* prefer = app.add_subcommand("prefer", "Rank Pareto members by a weighted sum of rescaled criteria");
    prefer->add_option("results", results, "Results CSV")->required()->check(CLI::ExistingFile);
    prefer->add_option("--weights", weights, "Six weights summing to 1: error,time,iterations,memory,macs,setup")
        ->required();
    prefer->add_option("-k,--top", k, "Number of members to list");

    auto* redisc = app.add_subcommand("rediscover", "Find weights under which a Pareto member ranks first");
    redisc->add_option("results", results, "Results CSV")->required()->check(CLI::ExistingFile);
    redisc->add_option("--config-id", config_id, "Target configuration")->required();

    Index grf_n = 31;
    double grf_mean = 1.0, grf_sigma = 0.3, grf_corr = 0.1, grf_floor = 0.1;
    std::uint64_t grf_seed = default_seed();
    auto* grf = app.add_subcommand("grf-sample", "Draw a Gaussian random field on the structured mesh");
    grf->add_option("--n", grf_n, "Grid points per side")->check(CLI::Range(2, 200));
    grf->add_option("--mean", grf_mean);
    grf->add_option("--sigma", grf_sigma, "Kernel amplitude");
    grf->add_option("--corr-len", grf_corr, "Correlation length");
    grf->add_option("--floor", grf_floor, "Lower clamp (use -inf for none)");
    grf->add_option("--seed", grf_seed);
    grf->add_option("-o,--output", grf_out, "x,y,value CSV (default stdout)");

    Index mesh_n = 31;
    auto* mesh = app.add_subcommand("mesh-info", "Print mesh, matrix and coarse-level sizes");
    mesh->add_option("--n", mesh_n, "Grid points per side")->check(CLI::Range(2, 500));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) return cmd_sweep(manifest, output, parallel, threads);
        if (*solve) return cmd_solve(solve_args);
        if (*pareto) return cmd_pareto(results, projection, prefix);
        if (*prefer) return cmd_prefer(results, weights, k);
        if (*redisc) return cmd_rediscover(results, config_id);
        if (*grf) return cmd_grf(grf_n, grf_mean, grf_sigma, grf_corr, grf_floor, grf_seed, grf_out);
        if (*mesh) return cmd_mesh_info(mesh_n);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
