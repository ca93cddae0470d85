#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdecmp/core/csv.hpp"
#include "sdecmp/core/drift.hpp"
#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/paths.hpp"
#include "sdecmp/integrate/integrate.hpp"
#include "sdecmp/zdual/duality.hpp"

namespace sdecmp {

/// Right-continuous step CDF of a weighted sample.
class WeightedEcdf {
 public:
  WeightedEcdf(std::span<const double> values, std::span<const double> weights);

  /// Weighted fraction of samples <= q.
  double operator()(double q) const;
  /// Delta-method standard error of operator()(q).
  double se(double q) const;
  /// Smallest sample value v with F(v) >= p.
  double quantile(double p) const;

  std::span<const double> sorted_values() const { return values_; }
  double ess() const { return ess_; }

 private:
  std::size_t count_le(double q) const;

  std::vector<double> values_;
  std::vector<double> cum_w_;   // prefix sums of normalized weights
  std::vector<double> cum_w2_;  // prefix sums of squared normalized weights
  double ess_ = 0.0;
};

/// ECDF of one coordinate; DegenerateError when ESS < ess_floor.
WeightedEcdf weighted_ecdf(const WeightedSampleSet& samples, std::size_t coordinate,
                           double ess_floor = 0.0);

enum class DominanceVerdict { dominates, violated, inconclusive };
std::string to_string(DominanceVerdict v);

struct DominanceSettings {
  double tolerance = 0.02;
  std::size_t n_bootstrap = 500;
  std::uint64_t seed = 1;
  double ess_floor = 100.0;
  std::vector<double> levels;  // Z-quantile probe levels; empty: 0.05, 0.10, ..., 0.95
  std::size_t workers = 1;
};

struct DominanceProbe {
  std::size_t coordinate = 0;
  std::string source;  // "z_quantile" or "y_decile"
  double level = 0.0;
  double q = 0.0;
  double f_z = 0.0;
  double f_y = 0.0;
  double gap = 0.0;  // f_z - f_y; <= 0 when Z dominates Y
  double gap_lcb = 0.0;
  double gap_ucb = 0.0;
};

struct CoordinateDominance {
  std::size_t coordinate = 0;
  double max_gap = 0.0;
  double max_ucb = 0.0;
  double max_lcb = 0.0;
  double min_lcb = 0.0;
  DominanceVerdict verdict = DominanceVerdict::inconclusive;
  bool equality = false;
};

/// First-order stochastic dominance of the Z-law over the Y-law, per
/// coordinate. A coordinate dominates when the bootstrap upper bound of the
/// gap is within tolerance at every probe and is violated when some lower
/// bound exceeds it. `equality` marks gaps within tolerance in both
/// directions.
struct DominanceReport {
  std::size_t knot = 0;
  double time = 0.0;
  double tolerance = 0.0;
  double effective_tolerance = 0.0;
  double ess_z = 0.0;
  std::size_t n_z = 0;
  std::size_t n_y = 0;        // Y samples used (alive at the knot)
  std::size_t n_y_total = 0;  // before dropping exploded paths
  double surviving_fraction = 1.0;
  std::size_t n_bootstrap = 0;
  std::vector<CoordinateDominance> coordinates;
  std::vector<DominanceProbe> probes;
  DominanceVerdict verdict = DominanceVerdict::inconclusive;
  bool equality = false;
  std::optional<std::string> explanation;

  /// Columns: coordinate, source, level, quantile, F_Z, F_Y, gap, gap_lcb, gap_ucb.
  CsvTable to_csv() const;
};

/// Z samples against Euler paths Y at `knot`, restricted to Y paths that
/// have not exploded by then.
DominanceReport dominance_check(const WeightedSampleSet& z, const PathBatch& y, std::size_t knot,
                                const DominanceSettings& settings = {});
/// Two weighted sample sets (used for controls with the roles swapped).
DominanceReport dominance_check(const WeightedSampleSet& z, const WeightedSampleSet& y,
                                const DominanceSettings& settings = {});

struct PathwiseCoordinate {
  std::size_t coordinate = 0;
  std::size_t n_violations = 0;  // (path, knot) pairs with a < b - slack
  double max_violation = 0.0;    // largest b - a among them
  double min_gap = 0.0;          // min of a - b over compared knots
  std::vector<double> min_gap_by_knot;  // NaN where nothing was compared
  std::vector<std::size_t> violations_by_knot;
};

struct PathwiseStats {
  std::size_t n_paths = 0;
  std::size_t n_compared = 0;  // (path, knot) pairs
  double slack = 0.0;
  std::vector<PathwiseCoordinate> coordinates;

  std::size_t total_violations() const;
  /// Columns: knot, time, coordinate, min_gap, violations.
  CsvTable to_csv(const TimeGrid& grid) const;
};

/// Pathwise a >= b check on coupled batches, up to the explosion knot of
/// `up_to` (inclusive) and while both paths are alive.
PathwiseStats pathwise_compare(const PathBatch& a, const PathBatch& b, const ExplosionInfo& up_to,
                               double slack = 1e-12);

struct ScalingOptions {
  double anchor = 0.0;
  std::vector<std::size_t> lags;  // in steps; empty: {2, 3, 5, 8, 12, 20}
  std::size_t n_bootstrap = 200;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double slope_se = 0.0;
  std::vector<double> lags;  // |t - s|
  std::vector<EstimateWithCI> moments;  // E|Z_t - Z_s|^3 per lag
  std::size_t n_paths = 0;

  double ci_width() const { return ci_upper - ci_lower; }
  /// Columns: lag, moment, se, log_lag, log_moment.
  CsvTable to_csv() const;
};

inline const std::vector<std::size_t> kDefaultScalingLags = {2, 3, 5, 8, 12, 20};

/// Slope of log E|Z_t - Z_s|^3 against log |t - s| with Z the Euler
/// solution; percentile bootstrap CI over paths.
ScalingFit kolmogorov_scaling(const DriftFn& drift, std::span<const double> x0,
                              const IncrementBatch& inc, const ScalingOptions& options = {});

}  // namespace sdecmp
