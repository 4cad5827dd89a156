#include "metasolve/moo.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace metasolve;

namespace {

std::vector<std::size_t> quadratic_pareto(const std::vector<Point>& pts)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            bool le = true, lt = false;
            for (std::size_t c = 0; c < pts[i].size(); ++c) {
                le = le && pts[j][c] <= pts[i][c];
                lt = lt || pts[j][c] < pts[i][c];
            }
            dominated = le && lt;
        }
        if (!dominated) out.push_back(i);
    }
    return out;
}

std::vector<Point> random_points(std::size_t count, std::size_t dim, std::mt19937_64& rng, bool integer)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> k(0, 4);
    std::vector<Point> pts(count, Point(dim));
    for (auto& p : pts)
        for (auto& v : p) v = integer ? k(rng) : u(rng);
    return pts;
}

double weighted(const std::vector<double>& l, const Point& p)
{
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += l[i] * p[i];
    return s;
}

}  // namespace

TEST_CASE("dominance and Pareto examples")
{
    CHECK(dominates({1, 2}, {2, 2}));
    CHECK_FALSE(dominates({1, 2}, {1, 2}));
    CHECK_FALSE(dominates({1, 2}, {2, 1}));
    CHECK(pareto_set({{1, 2}, {2, 1}, {2, 2}}) == std::vector<std::size_t>{0, 1});
    CHECK(pareto_set({{1, 1}, {1, 1}}) == std::vector<std::size_t>{0, 1});
    CHECK(pareto_set({{3, 3}}) == std::vector<std::size_t>{0});
    CHECK_THROWS(pareto_set({}));
    CHECK_THROWS(pareto_set({{1, 2}, {1}}));
    CHECK_THROWS(pareto_set({{1, std::nan("")}}));
}

TEST_CASE("Pareto set matches the quadratic oracle")
{
    std::mt19937_64 rng(31);
    for (int t = 0; t < 60; ++t) {
        const auto pts = random_points(50 + t * 5, 2 + t % 5, rng, t % 2 == 0);
        CHECK(pareto_set(pts) == quadratic_pareto(pts));
    }
}

TEST_CASE("rescaling")
{
    const Rescaled two = rescale({{1, 10}, {3, 20}});
    CHECK(two.values == std::vector<Point>{{0, 0}, {1, 1}});
    CHECK_FALSE(two.any_degenerate());

    const Rescaled flat = rescale({{1, 5}, {2, 5}, {3, 5}});
    CHECK(flat.degenerate == std::vector<bool>{false, true});
    CHECK(flat.any_degenerate());
    for (const auto& row : flat.values) CHECK(row[1] == 0.0);
    CHECK(flat.values[1][0] == 0.5);

    // positive affine maps per criterion leave the Pareto set and the rescaled values unchanged
    std::mt19937_64 rng(32);
    const auto pts = random_points(200, 4, rng, false);
    std::vector<Point> mapped = pts;
    const Point scale{2.0, 0.5, 100.0, 3.0}, shift{1.0, -4.0, 7.0, 0.0};
    for (auto& p : mapped)
        for (std::size_t c = 0; c < 4; ++c) p[c] = scale[c] * p[c] + shift[c];
    CHECK(pareto_set(mapped) == pareto_set(pts));
    const Rescaled a = rescale(pts), b = rescale(mapped);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t c = 0; c < 4; ++c) CHECK(a.values[i][c] == doctest::Approx(b.values[i][c]).epsilon(1e-12));
}

TEST_CASE("preference weights")
{
    CHECK_NOTHROW(PreferenceWeights({0.5, 0.5}));
    CHECK_THROWS(PreferenceWeights({0.5, 0.6}));
    CHECK_THROWS(PreferenceWeights({1.5, -0.5}));
    CHECK(PreferenceWeights::normalized({1, 3}).values() == std::vector<double>{0.25, 0.75});
    CHECK_THROWS(PreferenceWeights::normalized({0, 0}));
    CHECK(PreferenceWeights::parse("0.2,0.2,0.2,0.2,0.1,0.1").size() == 6);
    CHECK_THROWS(PreferenceWeights::parse("0.5,0.4"));
    CHECK_THROWS(PreferenceWeights::parse("0.5,x"));
    CHECK(PreferenceWeights({0.25, 0.75}).score({1, 0}) == 0.25);
}

TEST_CASE("preference ranking")
{
    const std::vector<Point> vals{{0, 1}, {1, 0}, {0.5, 0.5}};
    const RankResult tie = preference_rank(vals, {30, 10, 20}, PreferenceWeights({0.5, 0.5}), 3);
    CHECK(tie.top[0].id == 10);
    CHECK(tie.top[1].id == 20);
    CHECK(tie.top[2].id == 30);
    CHECK_FALSE(tie.clamped);
    const RankResult clamp = preference_rank(vals, {1, 2, 3}, PreferenceWeights({1.0, 0.0}), 9);
    CHECK(clamp.clamped);
    CHECK(clamp.top.size() == 3);
    CHECK(clamp.top[0].id == 1);  // scores 0, 1, 0.5
    CHECK(clamp.top[1].id == 3);

    // with strictly positive weights the best of the whole set is non-dominated
    std::mt19937_64 rng(33);
    std::gamma_distribution<double> g(1.0, 1.0);
    const auto pts = random_points(300, 6, rng, true);
    const Rescaled r = rescale(pts);
    std::vector<std::int64_t> ids(pts.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
    const auto front = pareto_set(pts);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> raw(6);
        for (auto& w : raw) w = g(rng) + 1e-6;
        const auto best = preference_rank(r.values, ids, PreferenceWeights::normalized(raw), 1).top.at(0);
        CHECK(std::binary_search(front.begin(), front.end(), best.member));
    }
}

TEST_CASE("rediscovering weights")
{
    const std::vector<Point> corner{{0, 1}, {1, 0}, {0.6, 0.6}};
    for (const std::size_t j : {0u, 1u}) {
        const RediscoverResult res = rediscover(corner, j);
        REQUIRE(res.status == LpStatus::Feasible);
        double best = 1e300;
        for (const auto& p : corner) best = std::min(best, weighted(res.lambda, p));
        CHECK(weighted(res.lambda, corner[j]) <= best + 1e-9);
        CHECK(res.lambda[0] + res.lambda[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(rediscover(corner, 2).status == LpStatus::Infeasible);

    const std::vector<Point> convex{{0, 1}, {1, 0}, {0.4, 0.4}};
    const RediscoverResult mid = rediscover(convex, 2);
    REQUIRE(mid.status == LpStatus::Feasible);
    for (const auto& p : convex) CHECK(weighted(mid.lambda, convex[2]) <= weighted(mid.lambda, p) + 1e-9);

    CHECK_THROWS(rediscover(convex, 3));
    CHECK(lp_status_name(LpStatus::Infeasible) == "infeasible");
}

TEST_CASE("front CSV round trip and filtering")
{
    std::vector<PerformanceRecord> recs(3);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].config_id = static_cast<std::int64_t>(10 + i);
        recs[i].perf = {1e-13 * (i + 1), 0.1 * i, 7 * i, 1.5, 123456789012ULL + i, 0.25};
    }
    std::stringstream buf;
    write_front_csv(buf, recs);
    const FrontImport back = read_front_csv(buf);
    REQUIRE(back.records.size() == 3);
    CHECK(back.skipped == 0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.records[i].config_id == recs[i].config_id);
        CHECK(back.records[i].perf.as_point() == recs[i].perf.as_point());
    }

    std::stringstream mixed("# comment\nconfig_id,name,converged,rel_error,wall_seconds,iterations,peak_megabytes,macs,"
                            "setup_seconds\n1,a,true,1e-12,0.5,10,2.0,1000,0.1\n2,b,false,,,,,,\n"
                            "3,c,true,2e-12,0.4,12,2.0,900,0.1\n");
    const FrontImport m = read_front_csv(mixed);
    CHECK(m.records.size() == 2);
    CHECK(m.skipped == 1);
    CHECK(m.records[1].perf.macs == 900);

    std::stringstream missing("config_id,rel_error\n1,0.5\n");
    CHECK_THROWS(read_front_csv(missing));
    CHECK(criterion_index("macs") == 4);
    CHECK_THROWS(criterion_index("flops"));

    PerformanceVector bad;
    bad.rel_error = -1.0;
    CHECK_THROWS(bad.validate());

    const ParetoFront front(back.records);
    CHECK(front.contains_id(10));
    CHECK(front.member_position(999) == -1);
}

TEST_CASE("rediscover on a front lying in one hyperplane")
{
    // every member minimizes the weighting normal to the plane; the LP is highly degenerate
    std::mt19937_64 rng(34);
    std::exponential_distribution<double> e(1.0);
    std::vector<Point> pts(150, Point(6));
    for (auto& p : pts) {
        double total = 0.0;
        for (auto& v : p) total += (v = e(rng));
        for (auto& v : p) v /= total;
    }
    const Rescaled r = rescale(pts);
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const RediscoverResult res = rediscover(r.values, j);
        REQUIRE(res.status == LpStatus::Feasible);
        double best = 1e300;
        for (const auto& p : r.values) best = std::min(best, weighted(res.lambda, p));
        CHECK(weighted(res.lambda, r.values[j]) <= best + kTieTolerance);
    }
}
