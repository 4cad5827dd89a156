#include "metasolve/sweep.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace metasolve;

#ifndef METASOLVE_MANIFEST_DIR
#error "METASOLVE_MANIFEST_DIR must point at the manifests directory"
#endif

namespace {

const char* kTwoConfigs = R"(
n = 9
basis = geometric
krylov = bicgstab, fgmres
smoother = gauss_seidel
strategy = 3-1-3
levels = 2
seed = 5
)";

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("basis tags")
{
    for (const char* tag : {"geometric", "geometric_qr", "random_qr:10", "file:/tmp/p.txt"})
        CHECK(BasisSpec::parse(tag).tag() == tag);
    CHECK(BasisSpec::parse("random_qr:40").sweeps == 40);
    CHECK_THROWS(BasisSpec::parse("random_qr:-1"));
    CHECK(BasisSpec::parse("random_qr").tag() == "random_qr:0");
    CHECK_THROWS(BasisSpec::parse("deeponet"));
    CHECK_THROWS(BasisSpec::parse("file:"));
}

TEST_CASE("grid cardinality")
{
    const SweepManifest a = SweepManifest::load(std::string(METASOLVE_MANIFEST_DIR) + "/grid900.manifest");
    const auto configs = enumerate_configs(a);
    CHECK(configs.size() == 900);
    for (std::size_t i = 0; i < configs.size(); ++i) CHECK(configs[i].id == static_cast<std::int64_t>(i));
    // levels vary fastest, basis slowest
    CHECK(configs[0].levels == 1);
    CHECK(configs[1].levels == 2);
    CHECK(configs[3].strategy.str() == "3-1-3");
    CHECK(configs[899].basis.tag() == "random_qr:40");

    SweepManifest fewer = a;
    fewer.strategy.pop_back();
    CHECK(enumerate_configs(fewer).size() == 720);
    CHECK(enumerate_configs(SweepManifest::parse("")).size() == 1);

    SweepManifest both = a;
    both.scheme = {"imex", "newton"};
    const auto twice = enumerate_configs(both);
    CHECK(twice.size() == 1800);
    CHECK(twice[899].scheme == Scheme::Imex);
    CHECK(twice[900].scheme == Scheme::Newton);
}

TEST_CASE("manifest errors")
{
    CHECK_THROWS(SweepManifest::parse("colour = blue"));
    CHECK_THROWS(SweepManifest::parse("krylov ="));
    CHECK_THROWS(SweepManifest::parse("krylov = minres"));
    CHECK_THROWS(SweepManifest::parse("levels = 4"));
    CHECK_THROWS(SweepManifest::parse("strategy = 3-2-3"));
    CHECK_THROWS(SweepManifest::parse("mode = turbo"));
    CHECK_THROWS(SweepManifest::parse("n = abc"));
    CHECK_THROWS(SweepManifest::parse("no equals sign"));
    CHECK_THROWS(SweepManifest::load("/nonexistent/manifest"));
    const SweepManifest m = SweepManifest::parse("# comment\nseed = 9  # trailing\nbasis = file:p.txt", "/data");
    CHECK(m.seed == 9);
    CHECK(m.basis.front() == "file:/data/p.txt");
    CHECK(SweepManifest::parse("", "", 77).seed == 77);
}

TEST_CASE("two-config sweep writes a header and two rows, and replays")
{
    const SweepManifest m = SweepManifest::parse(kTwoConfigs);
    std::ostringstream first, second;
    const SweepSummary s1 = run_sweep(m, first);
    const SweepSummary s2 = run_sweep(m, second);
    CHECK(line_count(first.str()) == 3);
    CHECK(first.str().rfind(std::string(kResultsHeader) + "\n", 0) == 0);
    CHECK(s1.runs == 2);
    CHECK(s1.failures == 0);
    REQUIRE(s1.rows.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(s1.rows[i].same_deterministic_columns(s2.rows[i]));
        REQUIRE(s1.rows[i].perf);
        CHECK(s1.rows[i].perf->rel_error <= 1e-10);
        CHECK(*s1.rows[i].ave_macs == static_cast<double>(s1.rows[i].perf->macs) / 8.0);
    }

    // the written rows read back exactly and feed the Pareto importer
    std::istringstream in(first.str());
    const auto back = read_results_csv(in);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].same_deterministic_columns(s1.rows[i]));
        CHECK(back[i].perf->wall_seconds == s1.rows[i].perf->wall_seconds);
    }
    std::istringstream front_in(first.str());
    const FrontImport imported = read_front_csv(front_in);
    REQUIRE(imported.records.size() == 2);
    CHECK(imported.records[1].perf.as_point() == s1.rows[1].perf->as_point());
}

TEST_CASE("parallel mode matches sequential on deterministic columns")
{
    SweepManifest m = SweepManifest::parse(kTwoConfigs);
    m.levels = {1, 2, 3};
    std::ostringstream seq, par;
    const SweepSummary a = run_sweep(m, seq);
    m.mode = TimingMode::Parallel;
    m.threads = 3;
    const SweepSummary b = run_sweep(m, par);
    CHECK(seq.str().find('#') == std::string::npos);
    CHECK(par.str().find("# timing") != std::string::npos);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].same_deterministic_columns(b.rows[i]));
}

TEST_CASE("failed runs become rows with empty criteria")
{
    SweepManifest m = SweepManifest::parse(kTwoConfigs);
    m.krylov_options.maxit = 1;
    m.basis = {"geometric", "file:/nonexistent/basis.txt"};
    std::ostringstream out;
    const SweepSummary s = run_sweep(m, out);
    CHECK(s.failures == 4);
    CHECK(s.failure_messages.size() == 4);
    for (const auto& row : s.rows) {
        CHECK_FALSE(row.converged);
        CHECK_FALSE(row.perf);
    }
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    CHECK(line.find(",false,,,,,,,,") != std::string::npos);
    std::istringstream again(out.str());
    const FrontImport imported = read_front_csv(again);
    CHECK(imported.records.empty());
    CHECK(imported.skipped == 4);
}

TEST_CASE("reference comparison")
{
    const RdProblem p = make_problem(ProblemSpec{.n = 9}, 3);
    const Reference ref = make_reference(Scheme::Imex, p);
    CHECK(ref.trajectory.size() == 9);
    CHECK(trajectory_error(ref.trajectory, ref.trajectory) == 0.0);
    CHECK_THROWS(trajectory_error({ref.trajectory.front()}, ref.trajectory));

    MetaSolverConfig cfg;
    cfg.smoother = SmootherKind::parse("ssor");
    cfg.strategy = SmoothingStrategy::parse("1-1-1");
    const std::string path = (std::filesystem::temp_directory_path() / "metasolve_sweep_basis.txt").string();
    save_basis(path, geometric_basis(*p.mesh, geometric_coarse_chain(9, 2).front()));
    cfg.levels = 2;
    cfg.basis = BasisSpec::parse("file:" + path);
    CHECK(run_config(cfg, p, ref, {}, 3).row.converged);
    cfg.levels = 3;
    const ConfigRun bad = run_config(cfg, p, ref, {}, 3);
    CHECK_FALSE(bad.row.converged);
    CHECK(bad.failure.find("levels") != std::string::npos);
    std::filesystem::remove(path);

    cfg.basis = BasisSpec::parse("geometric");
    cfg.krylov = KrylovMethod::Cg;
    CHECK_FALSE(cfg.nonsymmetric_cg());
    cfg.smoother = SmootherKind::parse("gauss_seidel");
    CHECK(cfg.nonsymmetric_cg());
}
