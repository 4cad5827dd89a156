#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace metasolve {

/// Criteria in column order: error, time, iterations, memory, MACs, setup time.
inline constexpr std::size_t kCriteria = 6;
inline const std::array<std::string, kCriteria> kCriterionNames = {
    "rel_error", "wall_seconds", "iterations", "peak_megabytes", "macs", "setup_seconds"};

/// Absolute tolerance on weighted sums and on LP feasibility.
inline constexpr double kTieTolerance = 1e-9;

/// Index of a criterion name, or throws std::invalid_argument listing the valid names.
std::size_t criterion_index(const std::string& name);

struct PerformanceVector {
    double rel_error = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t iterations = 0;
    double peak_megabytes = 0.0;
    std::uint64_t macs = 0;
    double setup_seconds = 0.0;

    [[nodiscard]] std::vector<double> as_point() const;
    /// Throws std::invalid_argument unless every entry is finite and >= 0.
    void validate() const;
};

struct PerformanceRecord {
    std::int64_t config_id = 0;
    PerformanceVector perf;
};

using Point = std::vector<double>;

/// a <= b everywhere and a < b somewhere.
bool dominates(const Point& a, const Point& b);

/// Indices of the non-dominated points, ascending. Equal points do not dominate each other.
/// Throws std::invalid_argument on an empty input, ragged rows, or non-finite entries.
std::vector<std::size_t> pareto_set(const std::vector<Point>& points);

struct Rescaled {
    std::vector<Point> values;       // one row per member, entries in [0, 1]
    std::vector<bool> degenerate;    // per criterion: max == min, coordinate forced to 0
    Point lower;
    Point upper;

    [[nodiscard]] bool any_degenerate() const;
};

/// f' = (f - min) / (max - min) per criterion, extrema taken over `members`.
Rescaled rescale(const std::vector<Point>& members);

/// Simplex weights: 0 <= lambda_i <= 1 and sum = 1 within 1e-12.
class PreferenceWeights {
public:
    explicit PreferenceWeights(std::vector<double> lambda);
    /// Divides nonnegative raw weights by their sum.
    static PreferenceWeights normalized(const std::vector<double>& raw);
    /// Parses "a,b,c,..."; rejects a sum farther than 1e-9 from 1, then renormalizes.
    static PreferenceWeights parse(const std::string& text);

    [[nodiscard]] const std::vector<double>& values() const { return lambda_; }
    [[nodiscard]] std::size_t size() const { return lambda_.size(); }
    [[nodiscard]] double score(const Point& rescaled) const;

private:
    std::vector<double> lambda_;
};

/// Pareto records with their rescaled criteria.
class ParetoFront {
public:
    explicit ParetoFront(std::vector<PerformanceRecord> records);

    [[nodiscard]] const std::vector<PerformanceRecord>& records() const { return records_; }
    [[nodiscard]] const std::vector<std::size_t>& pareto_indices() const { return pareto_; }
    [[nodiscard]] const Rescaled& rescaled() const { return rescaled_; }
    /// Position of `config_id` among the Pareto members, or -1.
    [[nodiscard]] std::ptrdiff_t member_position(std::int64_t config_id) const;
    [[nodiscard]] bool contains_id(std::int64_t config_id) const;
    [[nodiscard]] std::vector<std::int64_t> member_ids() const;
    [[nodiscard]] std::vector<Point> member_points() const;

private:
    std::vector<PerformanceRecord> records_;
    std::vector<std::size_t> pareto_;
    Rescaled rescaled_;
};

struct RankedMember {
    std::size_t member = 0;  // row in the rescaled set
    std::int64_t id = 0;
    double score = 0.0;
};

struct RankResult {
    std::vector<RankedMember> top;
    bool clamped = false;  // k exceeded the front size
};

/// The k rows with the smallest lambda^T f', ties broken by ascending id.
RankResult preference_rank(const std::vector<Point>& rescaled, const std::vector<std::int64_t>& ids,
                           const PreferenceWeights& weights, std::size_t k);
RankResult preference_rank(const ParetoFront& front, const PreferenceWeights& weights, std::size_t k);

enum class LpStatus { Feasible, Infeasible, NumericalFailure };

std::string lp_status_name(LpStatus status);

struct RediscoverResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> lambda;  // set when feasible
    double objective = 0.0;
    std::string message;
};

/// Weights on the simplex making row j a weighted-sum minimizer over `rescaled`:
/// minimize lambda^T f'_j s.t. lambda^T (f'_j - f'_m) <= 0 for m != j, sum lambda = 1, lambda >= 0.
/// Solved by a dense two-phase simplex with Bland's rule. The returned weights are verified:
/// a target more than 1e-9 above the minimum is reported as a numerical failure.
RediscoverResult rediscover(const std::vector<Point>& rescaled, std::size_t j);

/// Header naming config_id and the six criteria; one row per record.
void write_front_csv(std::ostream& out, const std::vector<PerformanceRecord>& records);

struct FrontImport {
    std::vector<PerformanceRecord> records;
    std::size_t skipped = 0;  // rows with converged=false or empty criteria
};

/// Reads any CSV holding config_id and the six criterion columns; other columns are ignored,
/// '#' lines are comments. Rows marked converged=false or with empty criteria are skipped.
FrontImport read_front_csv(std::istream& in);
FrontImport read_front_csv_file(const std::string& path);

}  // namespace metasolve
