#include "metasolve/coarse_basis.hpp"
#include "metasolve/krylov.hpp"
#include "metasolve/mesh_fem.hpp"
#include "metasolve/moo.hpp"
#include "metasolve/preconditioner.hpp"
#include "metasolve/sweep.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace metasolve;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

template <class T>
py::array_t<T> to_numpy(const std::vector<T>& v)
{
    py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

template <class T>
py::array_t<T> to_numpy(std::span<const T> v)
{
    py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<Point> to_points(const DoubleArray& a)
{
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array of points");
    const auto rows = a.shape(0), cols = a.shape(1);
    std::vector<Point> pts(static_cast<std::size_t>(rows), Point(static_cast<std::size_t>(cols)));
    auto r = a.unchecked<2>();
    for (py::ssize_t i = 0; i < rows; ++i)
        for (py::ssize_t j = 0; j < cols; ++j) pts[i][j] = r(i, j);
    return pts;
}

py::array_t<double> from_points(const std::vector<Point>& pts)
{
    const auto cols = pts.empty() ? 0 : pts.front().size();
    py::array_t<double> out({pts.size(), cols});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) w(i, j) = pts[i][j];
    return out;
}

Vector to_vector(const DoubleArray& a)
{
    if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
    return Vector(a.data(), a.data() + a.size());
}

py::tuple csr_tuple(const SparseMatrix& m)
{
    return py::make_tuple(to_numpy(m.values()), to_numpy(m.col_indices()), to_numpy(m.row_offsets()),
                          py::make_tuple(m.rows(), m.cols()));
}

SparseMatrix from_csr(const DoubleArray& data, const IndexArray& indices, const IndexArray& indptr, Index ncols)
{
    const Index nrows = static_cast<Index>(indptr.size()) - 1;
    if (nrows < 0) throw std::invalid_argument("indptr must not be empty");
    return SparseMatrix(nrows, ncols < 0 ? nrows : ncols,
                        std::vector<Index>(indptr.data(), indptr.data() + indptr.size()),
                        std::vector<Index>(indices.data(), indices.data() + indices.size()),
                        std::vector<double>(data.data(), data.data() + data.size()));
}

py::dict report_dict(const SolveReport& r)
{
    py::dict d;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["breakdown"] = r.breakdown;
    d["final_relative_residual"] = r.final_relative_residual;
    d["residual_history"] = r.residual_history;
    d["macs"] = r.macs;
    d["wall_seconds"] = r.wall_seconds;
    return d;
}

py::dict row_dict(const SweepRow& row)
{
    py::dict d;
    d["config_id"] = row.config_id;
    d["basis"] = row.basis;
    d["krylov"] = row.krylov;
    d["smoother"] = row.smoother;
    d["strategy"] = row.strategy;
    d["levels"] = row.levels;
    d["scheme"] = row.scheme;
    d["converged"] = row.converged;
    d["seed"] = row.seed;
    if (row.perf) {
        d["rel_error"] = row.perf->rel_error;
        d["wall_seconds"] = row.perf->wall_seconds;
        d["iterations"] = row.perf->iterations;
        d["peak_megabytes"] = row.perf->peak_megabytes;
        d["macs"] = row.perf->macs;
        d["setup_seconds"] = row.perf->setup_seconds;
    }
    if (row.ave_macs) d["ave_macs"] = *row.ave_macs;
    return d;
}

py::dict mesh_info(Index n, int extra_levels)
{
    const auto mesh = build_mesh(n);
    py::array_t<double> nodes({static_cast<py::ssize_t>(mesh->node_count()), py::ssize_t{2}});
    auto nw = nodes.mutable_unchecked<2>();
    for (std::size_t i = 0; i < mesh->nodes().size(); ++i) {
        nw(i, 0) = mesh->nodes()[i][0];
        nw(i, 1) = mesh->nodes()[i][1];
    }
    py::array_t<std::int64_t> tris({static_cast<py::ssize_t>(mesh->triangles().size()), py::ssize_t{3}});
    auto tw = tris.mutable_unchecked<2>();
    for (std::size_t t = 0; t < mesh->triangles().size(); ++t)
        for (int c = 0; c < 3; ++c) tw(t, c) = mesh->triangles()[t][c];
    py::dict d;
    d["n"] = n;
    d["h"] = mesh->h();
    d["node_count"] = mesh->node_count();
    d["interior_count"] = mesh->interior_count();
    d["nodes"] = nodes;
    d["triangles"] = tris;
    d["interior_nodes"] = to_numpy(mesh->interior_nodes());
    d["coarse_chain"] = geometric_coarse_chain(n, extra_levels);
    return d;
}

py::array_t<double> grf(Index n, double mean, double sigma, double corr_len, double floor, std::uint64_t seed)
{
    return to_numpy(grf_sample(GrfSpec{mean, sigma, corr_len, floor, seed}, build_mesh(n)).values);
}

py::dict assemble_system(Index n, const DoubleArray& k)
{
    const auto mesh = build_mesh(n);
    const FemSystem sys = assemble(*mesh, ScalarField(mesh, to_vector(k)));
    py::dict d;
    d["stiffness"] = csr_tuple(sys.stiffness);
    d["mass"] = csr_tuple(sys.mass);
    d["lumped_mass"] = to_numpy(sys.lumped_mass);
    return d;
}

py::tuple solve_linear(const DoubleArray& data, const IndexArray& indices, const IndexArray& indptr,
                       const DoubleArray& b, const std::string& method, double tol, int maxit, int restart)
{
    const SparseMatrix a = from_csr(data, indices, indptr, -1);
    const Vector rhs = to_vector(b);
    Vector x(rhs.size(), 0.0);
    KrylovOptions opts{tol, maxit, restart};
    CostCounter counter;
    SolveReport rep;
    {
        py::gil_scoped_release release;
        rep = krylov_solve(parse_krylov(method), a, rhs, x, IdentityPreconditioner(a.rows()), opts, counter);
    }
    return py::make_tuple(to_numpy(x), report_dict(rep));
}

py::dict solve_config(Index n, std::uint64_t seed, const std::string& scheme, const std::string& basis,
                      const std::string& krylov, const std::string& smoother, const std::string& strategy,
                      int levels, double tol, int maxit, int restart, double dt, double t_end, double theta)
{
    ProblemSpec spec;
    spec.n = n;
    spec.dt = dt;
    spec.t_end = t_end;
    spec.theta = theta;
    MetaSolverConfig config;
    config.basis = BasisSpec::parse(basis);
    config.krylov = parse_krylov(krylov);
    config.smoother = SmootherKind::parse(smoother);
    config.strategy = SmoothingStrategy::parse(strategy);
    config.levels = levels;
    config.scheme = parse_scheme(scheme);
    const KrylovOptions opts{tol, maxit, restart};

    std::optional<ConfigRun> run;
    {
        py::gil_scoped_release release;
        const RdProblem problem = make_problem(spec, seed);
        const Reference reference = make_reference(config.scheme, problem);
        run = run_config(config, problem, reference, opts, seed);
    }
    py::dict d = row_dict(run->row);
    d["failure"] = run->failure;
    if (run->result) {
        d["final_state"] = to_numpy(run->result->final_state.values);
        d["linear_solves"] = run->result->linear_solves;
        d["newton_traces"] = run->result->newton_traces;
    }
    return d;
}

std::vector<py::dict> list_configs(const std::string& manifest_text)
{
    std::vector<py::dict> out;
    for (const auto& c : enumerate_configs(SweepManifest::parse(manifest_text))) {
        py::dict d;
        d["id"] = c.id;
        d["basis"] = c.basis.tag();
        d["krylov"] = krylov_name(c.krylov);
        d["smoother"] = c.smoother.name();
        d["strategy"] = c.strategy.str();
        d["levels"] = c.levels;
        d["scheme"] = scheme_name(c.scheme);
        d["describe"] = c.describe();
        out.push_back(std::move(d));
    }
    return out;
}

py::dict sweep(const std::string& manifest_text, const std::string& output, const std::string& base_dir)
{
    SweepManifest m = SweepManifest::parse(manifest_text, base_dir);
    if (!output.empty()) m.output = output;
    SweepSummary s;
    {
        py::gil_scoped_release release;
        s = run_sweep(m);
    }
    py::dict d;
    d["runs"] = s.runs;
    d["failures"] = s.failures;
    d["failure_messages"] = s.failure_messages;
    d["output"] = m.output;
    std::vector<py::dict> rows;
    for (const auto& r : s.rows) rows.push_back(row_dict(r));
    d["rows"] = rows;
    return d;
}

std::vector<py::dict> read_results(const std::string& path)
{
    std::vector<py::dict> out;
    for (const auto& r : read_results_file(path)) out.push_back(row_dict(r));
    return out;
}

py::dict rescale_points(const DoubleArray& points)
{
    const Rescaled r = rescale(to_points(points));
    py::dict d;
    d["values"] = from_points(r.values);
    d["degenerate"] = r.degenerate;
    d["lower"] = r.lower;
    d["upper"] = r.upper;
    return d;
}

py::dict rank(const DoubleArray& rescaled, const std::vector<double>& weights, std::vector<std::int64_t> ids,
              std::size_t k)
{
    const auto pts = to_points(rescaled);
    if (ids.empty()) {
        ids.resize(pts.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
    }
    const RankResult r = preference_rank(pts, ids, PreferenceWeights(weights), k);
    std::vector<py::tuple> top;
    for (const auto& m : r.top) top.push_back(py::make_tuple(m.member, m.id, m.score));
    py::dict d;
    d["top"] = top;
    d["clamped"] = r.clamped;
    return d;
}

py::dict rediscover_weights(const DoubleArray& rescaled, std::size_t j)
{
    const RediscoverResult r = rediscover(to_points(rescaled), j);
    py::dict d;
    d["status"] = lp_status_name(r.status);
    d["lambda"] = r.lambda;
    d["objective"] = r.objective;
    d["message"] = r.message;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Hybrid-preconditioned Krylov meta-solvers for a reaction-diffusion benchmark, "
              "with Pareto and preference tools for comparing them.";

    py::register_exception<RankError>(m, "RankError", PyExc_ValueError);

    m.attr("CRITERIA") = std::vector<std::string>(kCriterionNames.begin(), kCriterionNames.end());
    m.attr("RESULTS_HEADER") = std::string(kResultsHeader);

    m.def("mesh_info", &mesh_info, py::arg("n"), py::arg("extra_levels") = 2,
          "Nodes, triangles, interior numbering and geometric coarse sizes of the n x n mesh.");
    m.def("grf_sample", &grf, py::arg("n"), py::arg("mean") = 0.0, py::arg("sigma") = 1.0,
          py::arg("corr_len") = 0.1, py::arg("floor") = -std::numeric_limits<double>::infinity(),
          py::arg("seed") = 0, "Gaussian random field sampled at the mesh nodes.");
    m.def("assemble", &assemble_system, py::arg("n"), py::arg("k"),
          "Interior stiffness and mass matrices as (data, indices, indptr, shape) CSR tuples.");
    m.def("solve_linear", &solve_linear, py::arg("data"), py::arg("indices"), py::arg("indptr"), py::arg("b"),
          py::arg("method") = "cg", py::arg("tol") = 1e-12, py::arg("maxit") = 10000, py::arg("restart") = 50,
          "Unpreconditioned Krylov solve of a CSR system from a zero guess; returns (x, report).");
    m.def("solve", &solve_config, py::arg("n") = 31, py::arg("seed") = 42, py::arg("scheme") = "imex",
          py::arg("basis") = "geometric", py::arg("krylov") = "bicgstab", py::arg("smoother") = "gauss_seidel",
          py::arg("strategy") = "3-1-3", py::arg("levels") = 2, py::arg("tol") = 1e-12, py::arg("maxit") = 10000,
          py::arg("restart") = 50, py::arg("dt") = 0.0, py::arg("t_end") = 1.0, py::arg("theta") = 1.0,
          "Run one meta-solver configuration on the benchmark; returns its results row.");
    m.def("enumerate_configs", &list_configs, py::arg("manifest"), "Configurations of a manifest, in id order.");
    m.def("run_sweep", &sweep, py::arg("manifest"), py::arg("output") = "", py::arg("base_dir") = "",
          "Run every configuration of a manifest and write the results CSV.");
    m.def("read_results", &read_results, py::arg("path"));

    m.def("dominates", &dominates, py::arg("a"), py::arg("b"));
    m.def("pareto_set", [](const DoubleArray& p) { return pareto_set(to_points(p)); }, py::arg("points"),
          "Indices of the non-dominated rows, ascending.");
    m.def("rescale", &rescale_points, py::arg("points"));
    m.def("preference_rank", &rank, py::arg("rescaled"), py::arg("weights"),
          py::arg("ids") = std::vector<std::int64_t>{}, py::arg("k") = 1,
          "Top k rows by weighted sum; returns (row, id, score) tuples.");
    m.def("rediscover", &rediscover_weights, py::arg("rescaled"), py::arg("j"),
          "Simplex weights under which row j is a weighted-sum minimizer.");
}
