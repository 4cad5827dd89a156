#include "metasolve/moo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace metasolve {

std::size_t criterion_index(const std::string& name)
{
    for (std::size_t i = 0; i < kCriteria; ++i)
        if (kCriterionNames[i] == name) return i;
    std::string valid;
    for (const auto& n : kCriterionNames) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown criterion '" + name + "' (valid: " + valid + ")");
}

std::vector<double> PerformanceVector::as_point() const
{
    return {rel_error, wall_seconds, static_cast<double>(iterations), peak_megabytes, static_cast<double>(macs),
            setup_seconds};
}

void PerformanceVector::validate() const
{
    const auto p = as_point();
    for (std::size_t i = 0; i < kCriteria; ++i)
        if (!std::isfinite(p[i]) || p[i] < 0.0)
            throw std::invalid_argument("criterion " + kCriterionNames[i] + " must be finite and >= 0");
}

bool dominates(const Point& a, const Point& b)
{
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

std::vector<std::size_t> pareto_set(const std::vector<Point>& points)
{
    if (points.empty()) throw std::invalid_argument("pareto_set: no points");
    const std::size_t d = points.front().size();
    for (const auto& p : points) {
        if (p.size() != d) throw std::invalid_argument("pareto_set: points have different dimensions");
        for (const double v : p)
            if (!std::isfinite(v)) throw std::invalid_argument("pareto_set: non-finite criterion value");
    }
    // A dominator precedes its victim lexicographically, so each point only needs checking
    // against the front accumulated so far; dominated points never need to be kept since
    // their own dominators are already in the front.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a] != points[b]) return points[a] < points[b];
        return a < b;
    });
    std::vector<std::size_t> front;
    for (const std::size_t idx : order) {
        const bool dominated =
            std::any_of(front.begin(), front.end(), [&](std::size_t f) { return dominates(points[f], points[idx]); });
        if (!dominated) front.push_back(idx);
    }
    std::sort(front.begin(), front.end());
    return front;
}

bool Rescaled::any_degenerate() const { return std::find(degenerate.begin(), degenerate.end(), true) != degenerate.end(); }

Rescaled rescale(const std::vector<Point>& members)
{
    if (members.empty()) throw std::invalid_argument("rescale: no members");
    const std::size_t d = members.front().size();
    Rescaled out;
    out.lower.assign(d, std::numeric_limits<double>::infinity());
    out.upper.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& m : members) {
        if (m.size() != d) throw std::invalid_argument("rescale: members have different dimensions");
        for (std::size_t i = 0; i < d; ++i) {
            if (!std::isfinite(m[i])) throw std::invalid_argument("rescale: non-finite criterion value");
            out.lower[i] = std::min(out.lower[i], m[i]);
            out.upper[i] = std::max(out.upper[i], m[i]);
        }
    }
    out.degenerate.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.degenerate[i] = !(out.upper[i] > out.lower[i]);
    out.values.reserve(members.size());
    for (const auto& m : members) {
        Point r(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            if (!out.degenerate[i]) r[i] = std::clamp((m[i] - out.lower[i]) / (out.upper[i] - out.lower[i]), 0.0, 1.0);
        out.values.push_back(std::move(r));
    }
    return out;
}

PreferenceWeights::PreferenceWeights(std::vector<double> lambda) : lambda_(std::move(lambda))
{
    if (lambda_.empty()) throw std::invalid_argument("weights: empty");
    double sum = 0.0;
    for (const double v : lambda_) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("weights: each entry must lie in [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "weights: sum is " << sum << ", expected 1";
        throw std::invalid_argument(msg.str());
    }
}

PreferenceWeights PreferenceWeights::normalized(const std::vector<double>& raw)
{
    double sum = 0.0;
    for (const double v : raw) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights: entries must be finite and >= 0");
        sum += v;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("weights: all entries are zero");
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / sum;
    return PreferenceWeights(std::move(out));
}

PreferenceWeights PreferenceWeights::parse(const std::string& text)
{
    std::vector<double> raw;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("weights: cannot parse '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos)
            throw std::invalid_argument("weights: cannot parse '" + item + "'");
        raw.push_back(v);
    }
    const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (std::abs(sum - 1.0) > kTieTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "weights must sum to 1 (got " << sum << ")";
        throw std::invalid_argument(msg.str());
    }
    return normalized(raw);
}

double PreferenceWeights::score(const Point& rescaled) const
{
    if (rescaled.size() != lambda_.size()) throw std::invalid_argument("weights: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < lambda_.size(); ++i) s += lambda_[i] * rescaled[i];
    return s;
}

ParetoFront::ParetoFront(std::vector<PerformanceRecord> records) : records_(std::move(records))
{
    std::vector<Point> points;
    points.reserve(records_.size());
    for (const auto& r : records_) {
        r.perf.validate();
        points.push_back(r.perf.as_point());
    }
    pareto_ = pareto_set(points);
    rescaled_ = rescale(member_points());
}

std::ptrdiff_t ParetoFront::member_position(std::int64_t config_id) const
{
    for (std::size_t i = 0; i < pareto_.size(); ++i)
        if (records_[pareto_[i]].config_id == config_id) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

bool ParetoFront::contains_id(std::int64_t config_id) const
{
    return std::any_of(records_.begin(), records_.end(), [&](const auto& r) { return r.config_id == config_id; });
}

std::vector<std::int64_t> ParetoFront::member_ids() const
{
    std::vector<std::int64_t> ids;
    for (const auto i : pareto_) ids.push_back(records_[i].config_id);
    return ids;
}

std::vector<Point> ParetoFront::member_points() const
{
    std::vector<Point> pts;
    for (const auto i : pareto_) pts.push_back(records_[i].perf.as_point());
    return pts;
}

RankResult preference_rank(const std::vector<Point>& rescaled, const std::vector<std::int64_t>& ids,
                           const PreferenceWeights& weights, std::size_t k)
{
    if (rescaled.size() != ids.size()) throw std::invalid_argument("preference_rank: ids and rows differ in length");
    std::vector<RankedMember> all;
    all.reserve(rescaled.size());
    for (std::size_t i = 0; i < rescaled.size(); ++i) all.push_back({i, ids[i], weights.score(rescaled[i])});
    std::sort(all.begin(), all.end(), [](const RankedMember& a, const RankedMember& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.id < b.id;
    });
    RankResult out;
    out.clamped = k > all.size();
    all.resize(std::min(k, all.size()));
    out.top = std::move(all);
    return out;
}

RankResult preference_rank(const ParetoFront& front, const PreferenceWeights& weights, std::size_t k)
{
    return preference_rank(front.rescaled().values, front.member_ids(), weights, k);
}

std::string lp_status_name(LpStatus status)
{
    switch (status) {
    case LpStatus::Feasible: return "feasible";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::NumericalFailure: return "numerical failure";
    }
    return "unknown";
}

namespace {

constexpr double kPivotEps = 1e-9;  // smaller pivots amplify rounding on near-degenerate fronts

enum class SimplexOutcome { Optimal, Unbounded, IterationLimit };

// Dense tableau for min c^T x, A x = b, x >= 0 with a known feasible basis.
struct Tableau {
    std::vector<std::vector<double>> rows;  // each row: coefficients then rhs
    std::vector<std::size_t> basis;
    std::size_t vars = 0;

    [[nodiscard]] double rhs(std::size_t r) const { return rows[r][vars]; }

    void pivot(std::size_t pr, std::size_t pc)
    {
        auto& prow = rows[pr];
        const double inv = 1.0 / prow[pc];
        for (auto& v : prow) v *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == pr) continue;
            const double f = rows[r][pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= vars; ++c) rows[r][c] -= f * prow[c];
            rows[r][pc] = 0.0;
        }
        basis[pr] = pc;
    }

    // Bland's rule: lowest-index improving column, lowest-index basic variable on ratio ties.
    SimplexOutcome minimize(const std::vector<double>& cost, const std::vector<bool>& allowed)
    {
        const std::size_t limit = 50 * (rows.size() + vars) + 100;
        for (std::size_t iter = 0; iter < limit; ++iter) {
            std::size_t enter = vars;
            for (std::size_t c = 0; c < vars && enter == vars; ++c) {
                if (!allowed[c]) continue;
                double reduced = cost[c];
                for (std::size_t r = 0; r < rows.size(); ++r) reduced -= cost[basis[r]] * rows[r][c];
                if (reduced < -kPivotEps) enter = c;
            }
            if (enter == vars) return SimplexOutcome::Optimal;
            std::size_t leave = rows.size();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const double a = rows[r][enter];
                if (a <= kPivotEps) continue;
                const double ratio = std::max(rhs(r), 0.0) / a;
                if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
                    best = ratio;
                    leave = r;
                }
            }
            if (leave == rows.size()) return SimplexOutcome::Unbounded;
            pivot(leave, enter);
        }
        return SimplexOutcome::IterationLimit;
    }

    [[nodiscard]] double objective(const std::vector<double>& cost) const
    {
        double z = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) z += cost[basis[r]] * rhs(r);
        return z;
    }
};

}  // namespace

RediscoverResult rediscover(const std::vector<Point>& rescaled, std::size_t j)
{
    if (j >= rescaled.size()) throw std::out_of_range("rediscover: target index out of range");
    const std::size_t d = rescaled[j].size();
    const std::size_t q = rescaled.size() - 1;  // one inequality per other member

    // columns: lambda (d), slacks (q), artificial (1)
    Tableau t;
    t.vars = d + q + 1;
    const std::size_t artificial = d + q;
    std::size_t row = 0;
    for (std::size_t m = 0; m < rescaled.size(); ++m) {
        if (m == j) continue;
        if (rescaled[m].size() != d) throw std::invalid_argument("rediscover: rows have different dimensions");
        std::vector<double> r(t.vars + 1, 0.0);
        for (std::size_t i = 0; i < d; ++i) r[i] = rescaled[j][i] - rescaled[m][i];
        r[d + row] = 1.0;
        t.rows.push_back(std::move(r));
        t.basis.push_back(d + row);
        ++row;
    }
    {
        std::vector<double> r(t.vars + 1, 0.0);
        for (std::size_t i = 0; i < d; ++i) r[i] = 1.0;
        r[artificial] = 1.0;
        r[t.vars] = 1.0;
        t.rows.push_back(std::move(r));
        t.basis.push_back(artificial);
    }

    RediscoverResult result;
    std::vector<bool> allowed(t.vars, true);
    std::vector<double> phase1(t.vars, 0.0);
    phase1[artificial] = 1.0;
    if (t.minimize(phase1, allowed) != SimplexOutcome::Optimal) {
        result.status = LpStatus::NumericalFailure;
        result.message = "phase 1 did not terminate";
        return result;
    }
    if (t.objective(phase1) > kTieTolerance) {
        result.status = LpStatus::Infeasible;
        result.message = "no simplex weights make this member a weighted-sum minimizer (nonconvex region)";
        return result;
    }
    // drive a zero-valued artificial out of the basis
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.basis[r] != artificial) continue;
        for (std::size_t c = 0; c < artificial; ++c) {
            if (std::abs(t.rows[r][c]) > kPivotEps) {
                t.pivot(r, c);
                break;
            }
        }
    }
    allowed[artificial] = false;
    std::vector<double> phase2(t.vars, 0.0);
    for (std::size_t i = 0; i < d; ++i) phase2[i] = rescaled[j][i];
    if (t.minimize(phase2, allowed) != SimplexOutcome::Optimal) {
        result.status = LpStatus::NumericalFailure;
        result.message = "phase 2 did not terminate";
        return result;
    }

    std::vector<double> lambda(d, 0.0);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.basis[r] < d) lambda[t.basis[r]] = std::max(t.rhs(r), 0.0);
    const double sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    if (!(sum > 0.0)) {
        result.status = LpStatus::NumericalFailure;
        result.message = "weights vanished";
        return result;
    }
    for (auto& v : lambda) v = std::min(v / sum, 1.0);

    double target = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < rescaled.size(); ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += lambda[i] * rescaled[m][i];
        if (m == j) target = s;
        best = std::min(best, s);
    }
    if (target - best > kTieTolerance) {
        std::ostringstream msg;
        msg << "returned weights leave the target " << target - best << " above the minimum";
        result.status = LpStatus::NumericalFailure;
        result.message = msg.str();
        return result;
    }
    result.status = LpStatus::Feasible;
    result.lambda = std::move(lambda);
    result.objective = target;
    return result;
}

void write_front_csv(std::ostream& out, const std::vector<PerformanceRecord>& records)
{
    out << "config_id";
    for (const auto& n : kCriterionNames) out << ',' << n;
    out << '\n';
    const auto old = out.precision(17);
    for (const auto& r : records) {
        const auto& p = r.perf;
        out << r.config_id << ',' << p.rel_error << ',' << p.wall_seconds << ',' << p.iterations << ','
            << p.peak_megabytes << ',' << p.macs << ',' << p.setup_seconds << '\n';
    }
    out.precision(old);
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::stringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

FrontImport read_front_csv(std::istream& in)
{
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        header = split_csv(line);
        break;
    }
    if (header.empty()) throw std::invalid_argument("front CSV: missing header");
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    auto need = [&](const std::string& name) {
        const auto it = col.find(name);
        if (it == col.end()) throw std::invalid_argument("front CSV: missing column '" + name + "'");
        return it->second;
    };
    const std::size_t id_col = need("config_id");
    std::array<std::size_t, kCriteria> crit{};
    for (std::size_t i = 0; i < kCriteria; ++i) crit[i] = need(kCriterionNames[i]);
    const auto conv = col.find("converged");

    FrontImport out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("front CSV line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        if (conv != col.end() && cells[conv->second] != "true") {
            ++out.skipped;
            continue;
        }
        if (std::any_of(crit.begin(), crit.end(), [&](std::size_t c) { return cells[c].empty(); })) {
            ++out.skipped;
            continue;
        }
        PerformanceRecord rec;
        try {
            rec.config_id = std::stoll(cells[id_col]);
            rec.perf.rel_error = std::stod(cells[crit[0]]);
            rec.perf.wall_seconds = std::stod(cells[crit[1]]);
            rec.perf.iterations = std::stoull(cells[crit[2]]);
            rec.perf.peak_megabytes = std::stod(cells[crit[3]]);
            rec.perf.macs = std::stoull(cells[crit[4]]);
            rec.perf.setup_seconds = std::stod(cells[crit[5]]);
        } catch (const std::exception&) {
            throw std::invalid_argument("front CSV line " + std::to_string(line_no) + ": malformed number");
        }
        rec.perf.validate();
        out.records.push_back(rec);
    }
    return out;
}

FrontImport read_front_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_front_csv(in);
}

}  // namespace metasolve
