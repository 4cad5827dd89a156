#include "metasolve/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace metasolve {

BasisSpec BasisSpec::parse(const std::string& tag)
{
    BasisSpec spec;
    if (tag == "geometric") return spec;
    if (tag == "geometric_qr") {
        spec.orthonormal = true;
        return spec;
    }
    const auto colon = tag.find(':');
    const std::string head = tag.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : tag.substr(colon + 1);
    if (head == "random_qr") {
        spec.kind = BasisKind::RandomSmoothedQR;
        spec.orthonormal = true;
        if (!rest.empty()) {
            std::size_t used = 0;
            try {
                spec.sweeps = std::stoi(rest, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != rest.size() || spec.sweeps < 0)
                throw std::invalid_argument("basis tag '" + tag + "': sweeps must be a non-negative integer");
        }
        return spec;
    }
    if (head == "file" && !rest.empty()) {
        spec.kind = BasisKind::FromFile;
        spec.path = rest;
        return spec;
    }
    throw std::invalid_argument("unknown basis tag '" + tag +
                                "' (expected geometric|geometric_qr|random_qr:<sweeps>|file:<path>)");
}

std::string BasisSpec::tag() const
{
    switch (kind) {
    case BasisKind::Geometric: return orthonormal ? "geometric_qr" : "geometric";
    case BasisKind::RandomSmoothedQR: return "random_qr:" + std::to_string(sweeps);
    case BasisKind::FromFile: return "file:" + path;
    }
    return "unknown";
}

BasisProvider make_basis_provider(const BasisSpec& spec, Index fine_n, std::uint64_t seed)
{
    auto cache = std::make_shared<std::map<int, ProlongationBasis>>();
    return [spec, fine_n, seed, cache](int depth, const SparseMatrix& a) -> ProlongationBasis {
        if (const auto it = cache->find(depth); it != cache->end()) return it->second;
        if (spec.kind == BasisKind::FromFile && depth > 0)
            throw std::invalid_argument("file basis supplies the second level only; use levels <= 2");
        const std::vector<Index> chain = geometric_coarse_chain(fine_n, depth + 1);
        const Index coarse_n = chain[static_cast<std::size_t>(depth)];
        const Index level_n = depth == 0 ? fine_n : chain[static_cast<std::size_t>(depth - 1)];
        std::optional<ProlongationBasis> basis;
        switch (spec.kind) {
        case BasisKind::Geometric:
            basis = geometric_basis(*build_mesh(level_n), coarse_n);
            if (spec.orthonormal) basis = orthonormalize(*basis);
            break;
        case BasisKind::RandomSmoothedQR:
            basis = random_smoothed_qr_basis(a, (coarse_n - 2) * (coarse_n - 2), spec.sweeps, seed + depth);
            break;
        case BasisKind::FromFile: basis = load_basis(spec.path, a.rows()); break;
        }
        cache->emplace(depth, *basis);
        return *basis;
    };
}

bool MetaSolverConfig::nonsymmetric_cg() const
{
    return krylov == KrylovMethod::Cg &&
           (smoother.type == SmootherType::GaussSeidel || smoother.type == SmootherType::Sor);
}

HybridOptions MetaSolverConfig::hybrid_options() const { return {levels, smoother, strategy}; }

std::string MetaSolverConfig::describe() const
{
    std::ostringstream out;
    out << "#" << id << " " << scheme_name(scheme) << " basis=" << basis.tag() << " krylov=" << krylov_name(krylov)
        << " smoother=" << smoother.name() << " strategy=" << strategy.str() << " levels=" << levels;
    return out.str();
}

RdProblem make_problem(const ProblemSpec& spec, std::uint64_t seed)
{
    auto mesh = build_mesh(spec.n);
    GrfSpec k = spec.k;
    GrfSpec f = spec.f;
    k.seed = seed;
    f.seed = seed + 1;
    RdProblem p(mesh, GrfSampler(k, mesh).sample(), GrfSampler(f, mesh).sample(), ScalarField(mesh, 0.0));
    p.dt = spec.dt > 0.0 ? spec.dt : mesh->h();
    p.t_end = spec.t_end;
    p.theta = spec.theta;
    p.reaction_scale = spec.reaction_scale;
    p.validate();
    return p;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> out;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& value)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("manifest: '" + key + "' expects a number");
    return v;
}

long long to_integer(const std::string& key, const std::string& value)
{
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("manifest: '" + key + "' expects an integer");
    return v;
}

}  // namespace

SweepManifest SweepManifest::parse(const std::string& text, const std::string& base_dir, std::uint64_t default_seed)
{
    SweepManifest m;
    m.seed = default_seed;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("manifest line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto& p = m.problem;
        if (key == "n") p.n = to_integer(key, value);
        else if (key == "dt") p.dt = to_double(key, value);
        else if (key == "t_end") p.t_end = to_double(key, value);
        else if (key == "theta") p.theta = to_double(key, value);
        else if (key == "reaction_scale") p.reaction_scale = to_double(key, value);
        else if (key == "k_mean") p.k.mean = to_double(key, value);
        else if (key == "k_sigma") p.k.variance_scale = to_double(key, value);
        else if (key == "k_corr_len") p.k.corr_len = to_double(key, value);
        else if (key == "k_floor") p.k.floor = to_double(key, value);
        else if (key == "f_mean") p.f.mean = to_double(key, value);
        else if (key == "f_sigma") p.f.variance_scale = to_double(key, value);
        else if (key == "f_corr_len") p.f.corr_len = to_double(key, value);
        else if (key == "tol") m.krylov_options.tol = to_double(key, value);
        else if (key == "maxit") m.krylov_options.maxit = static_cast<int>(to_integer(key, value));
        else if (key == "restart") m.krylov_options.restart = static_cast<int>(to_integer(key, value));
        else if (key == "omega") m.omega = to_double(key, value);
        else if (key == "cheb_ratio") m.cheb_ratio = to_double(key, value);
        else if (key == "basis") {
            m.basis = split_list(value);
            for (auto& tag : m.basis) {
                if (tag.rfind("file:", 0) == 0 && !base_dir.empty()) {
                    const std::filesystem::path path = tag.substr(5);
                    if (path.is_relative()) tag = "file:" + (std::filesystem::path(base_dir) / path).string();
                }
            }
        }
        else if (key == "krylov") m.krylov = split_list(value);
        else if (key == "smoother") m.smoother = split_list(value);
        else if (key == "strategy") m.strategy = split_list(value);
        else if (key == "levels") {
            m.levels.clear();
            for (const auto& v : split_list(value)) m.levels.push_back(static_cast<int>(to_integer(key, v)));
        }
        else if (key == "scheme") m.scheme = split_list(value);
        else if (key == "seed") {
            const long long s = to_integer(key, value);
            if (s < 0) throw std::invalid_argument("manifest: seed must be non-negative");
            m.seed = static_cast<std::uint64_t>(s);
        }
        else if (key == "output") m.output = value;
        else if (key == "mode") {
            if (value == "sequential") m.mode = TimingMode::Sequential;
            else if (value == "parallel") m.mode = TimingMode::Parallel;
            else throw std::invalid_argument("manifest: mode must be sequential or parallel");
        }
        else if (key == "threads") {
            const long long t = to_integer(key, value);
            if (t < 0) throw std::invalid_argument("manifest: threads must be non-negative");
            m.threads = static_cast<unsigned>(t);
        }
        else throw std::invalid_argument("manifest line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    m.validate();
    return m;
}

SweepManifest SweepManifest::load(const std::string& path, std::uint64_t default_seed)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str(), std::filesystem::path(path).parent_path().string(), default_seed);
}

void SweepManifest::validate() const
{
    auto nonempty = [](const auto& axis, const char* name) {
        if (axis.empty()) throw std::invalid_argument(std::string("manifest: axis '") + name + "' is empty");
    };
    nonempty(basis, "basis");
    nonempty(krylov, "krylov");
    nonempty(smoother, "smoother");
    nonempty(strategy, "strategy");
    nonempty(levels, "levels");
    nonempty(scheme, "scheme");
    for (const auto& b : basis) BasisSpec::parse(b);
    for (const auto& k : krylov) parse_krylov(k);
    for (const auto& s : smoother) SmootherKind::parse(s, omega, cheb_ratio).validate();
    for (const auto& s : strategy) SmoothingStrategy::parse(s);
    for (const int l : levels)
        if (l < 1 || l > 3) throw std::invalid_argument("manifest: levels must be 1, 2 or 3");
    for (const auto& s : scheme) parse_scheme(s);
    if (problem.n < 3) throw std::invalid_argument("manifest: n must be at least 3");
    if (!(krylov_options.tol > 0.0)) throw std::invalid_argument("manifest: tol must be positive");
    if (krylov_options.maxit < 0) throw std::invalid_argument("manifest: maxit must be non-negative");
    if (krylov_options.restart < 1) throw std::invalid_argument("manifest: restart must be >= 1");
    if (output.empty()) throw std::invalid_argument("manifest: output is empty");
}

std::vector<MetaSolverConfig> enumerate_configs(const SweepManifest& manifest)
{
    manifest.validate();
    std::vector<MetaSolverConfig> out;
    std::int64_t id = 0;
    for (const auto& sc : manifest.scheme)
        for (const auto& b : manifest.basis)
            for (const auto& k : manifest.krylov)
                for (const auto& sm : manifest.smoother)
                    for (const auto& st : manifest.strategy)
                        for (const int l : manifest.levels) {
                            MetaSolverConfig c;
                            c.id = id++;
                            c.basis = BasisSpec::parse(b);
                            c.krylov = parse_krylov(k);
                            c.smoother = SmootherKind::parse(sm, manifest.omega, manifest.cheb_ratio);
                            c.strategy = SmoothingStrategy::parse(st);
                            c.levels = l;
                            c.scheme = parse_scheme(sc);
                            out.push_back(std::move(c));
                        }
    return out;
}

bool SweepRow::same_deterministic_columns(const SweepRow& o) const
{
    if (config_id != o.config_id || basis != o.basis || krylov != o.krylov || smoother != o.smoother ||
        strategy != o.strategy || levels != o.levels || scheme != o.scheme || converged != o.converged ||
        seed != o.seed || perf.has_value() != o.perf.has_value() || ave_macs != o.ave_macs)
        return false;
    if (!perf) return true;
    return perf->rel_error == o.perf->rel_error && perf->iterations == o.perf->iterations &&
           perf->peak_megabytes == o.perf->peak_megabytes && perf->macs == o.perf->macs;
}

void write_results_header(std::ostream& out) { out << kResultsHeader << '\n'; }

void write_results_row(std::ostream& out, const SweepRow& r)
{
    const auto old = out.precision(17);
    out << r.config_id << ',' << r.basis << ',' << r.krylov << ',' << r.smoother << ',' << r.strategy << ','
        << r.levels << ',' << r.scheme << ',' << (r.converged ? "true" : "false") << ',';
    if (r.perf) {
        const auto& p = *r.perf;
        out << p.rel_error << ',' << p.wall_seconds << ',' << p.iterations << ',' << p.peak_megabytes << ','
            << p.macs << ',' << p.setup_seconds << ',';
    } else {
        out << ",,,,,,";
    }
    if (r.ave_macs) out << *r.ave_macs;
    out << ',' << r.seed << '\n';
    out.precision(old);
}

std::vector<SweepRow> read_results_csv(std::istream& in)
{
    std::vector<SweepRow> rows;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kResultsHeader)
                throw std::invalid_argument("results file: unexpected header on line " + std::to_string(line_no));
            header_seen = true;
            continue;
        }
        std::vector<std::string> c;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) c.push_back(cell);
        if (line.back() == ',') c.emplace_back();
        if (c.size() != 16)
            throw std::invalid_argument("results file line " + std::to_string(line_no) + ": expected 16 cells");
        SweepRow r;
        try {
            r.config_id = std::stoll(c[0]);
            r.basis = c[1];
            r.krylov = c[2];
            r.smoother = c[3];
            r.strategy = c[4];
            r.levels = std::stoi(c[5]);
            r.scheme = c[6];
            r.converged = c[7] == "true";
            if (!c[8].empty()) {
                PerformanceVector p;
                p.rel_error = std::stod(c[8]);
                p.wall_seconds = std::stod(c[9]);
                p.iterations = std::stoull(c[10]);
                p.peak_megabytes = std::stod(c[11]);
                p.macs = std::stoull(c[12]);
                p.setup_seconds = std::stod(c[13]);
                r.perf = p;
            }
            if (!c[14].empty()) r.ave_macs = std::stod(c[14]);
            r.seed = std::stoull(c[15]);
        } catch (const std::exception&) {
            throw std::invalid_argument("results file line " + std::to_string(line_no) + ": malformed value");
        }
        rows.push_back(std::move(r));
    }
    if (!header_seen) throw std::invalid_argument("results file: missing header");
    return rows;
}

std::vector<SweepRow> read_results_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file '" + path + "'");
    return read_results_csv(in);
}

Reference make_reference(Scheme scheme, const RdProblem& problem)
{
    RunOptions options;
    options.keep_trajectory = true;
    return {scheme, reference_solve(scheme, problem, options).trajectory};
}

double trajectory_error(const std::vector<ScalarField>& run, const std::vector<ScalarField>& reference)
{
    if (run.size() != reference.size()) throw DimensionError("trajectory_error: trajectories differ in length");
    double worst = 0.0;
    for (std::size_t i = 0; i < run.size(); ++i) worst = std::max(worst, relative_error(run[i], reference[i]));
    return worst;
}

ConfigRun run_config(const MetaSolverConfig& config, const RdProblem& problem, const Reference& reference,
                     const KrylovOptions& options, std::uint64_t seed)
{
    ConfigRun out;
    SweepRow& row = out.row;
    row.config_id = config.id;
    row.basis = config.basis.tag();
    row.krylov = krylov_name(config.krylov);
    row.smoother = config.smoother.name();
    row.strategy = config.strategy.str();
    row.levels = config.levels;
    row.scheme = scheme_name(config.scheme);
    row.seed = seed;
    if (reference.scheme != config.scheme) throw std::invalid_argument("run_config: reference uses another scheme");
    try {
        MetaSolverStrategy strategy(config.krylov, options, config.hybrid_options(),
                                    make_basis_provider(config.basis, problem.mesh->n(), seed));
        RunOptions run_options;
        run_options.keep_trajectory = true;
        RunResult result = run_scheme(config.scheme, problem, strategy, run_options);
        PerformanceVector p;
        p.rel_error = trajectory_error(result.trajectory, reference.trajectory);
        p.wall_seconds = result.wall_seconds;
        p.iterations = static_cast<std::uint64_t>(result.aggregate.iterations);
        p.peak_megabytes = static_cast<double>(result.peak_bytes) / 1e6;
        p.macs = result.aggregate.macs;
        p.setup_seconds = result.setup_seconds;
        row.converged = true;
        row.perf = p;
        row.ave_macs = result.linear_solves > 0 ? static_cast<double>(p.macs) / result.linear_solves : 0.0;
        result.trajectory.clear();
        out.result = std::move(result);
    } catch (const std::exception& e) {
        out.failure = e.what();
    }
    return out;
}

SweepSummary run_sweep(const SweepManifest& manifest, std::ostream& out)
{
    const auto configs = enumerate_configs(manifest);
    const RdProblem problem = make_problem(manifest.problem, manifest.seed);
    std::map<Scheme, Reference> references;
    for (const auto& c : configs)
        if (!references.count(c.scheme)) references.emplace(c.scheme, make_reference(c.scheme, problem));

    std::vector<ConfigRun> runs(configs.size());
    auto run_one = [&](std::size_t i) {
        runs[i] = run_config(configs[i], problem, references.at(configs[i].scheme), manifest.krylov_options,
                             manifest.seed);
    };
    if (manifest.mode == TimingMode::Parallel) {
        unsigned threads = manifest.threads ? manifest.threads : std::max(1u, std::thread::hardware_concurrency());
        threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1)));
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < configs.size(); i = next++) run_one(i);
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < configs.size(); ++i) run_one(i);
    }

    if (manifest.mode == TimingMode::Parallel)
        out << "# timing: parallel mode, wall_seconds and setup_seconds were measured under contention\n";
    write_results_header(out);
    SweepSummary summary;
    for (auto& r : runs) {
        write_results_row(out, r.row);
        ++summary.runs;
        if (!r.row.converged) {
            ++summary.failures;
            summary.failure_messages.push_back("config " + std::to_string(r.row.config_id) + ": " + r.failure);
        }
        summary.rows.push_back(std::move(r.row));
    }
    out.flush();
    if (!out) throw std::runtime_error("failed writing results");
    return summary;
}

SweepSummary run_sweep(const SweepManifest& manifest)
{
    std::ofstream out(manifest.output);
    if (!out) throw std::runtime_error("cannot open results file '" + manifest.output + "' for writing");
    return run_sweep(manifest, out);
}

}  // namespace metasolve
