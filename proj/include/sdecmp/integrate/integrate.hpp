#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sdecmp/core/drift.hpp"
#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/paths.hpp"

namespace sdecmp {

inline const std::vector<double> kDefaultThresholds = {1e1, 1e2, 1e3, 1e4};

/// First-exit statistics for one level N of the threshold ladder.
struct LevelSummary {
  double level = 0.0;
  std::size_t n_crossed = 0;
  double fraction = 0.0;
  // Quantiles of the crossing time over the paths that crossed.
  std::optional<double> tau_q10, tau_median, tau_q90;
};

struct ExplosionInfo {
  std::vector<double> levels;  // increasing; the last one stops paths
  /// first_crossing[l][p]: first knot with |Y| > levels[l], if any.
  std::vector<std::vector<std::optional<std::size_t>>> first_crossing;
  std::vector<LevelSummary> summaries;
  std::size_t n_nonfinite = 0;  // explosions caused by a non-finite drift value
};

struct EulerResult {
  PathBatch paths;
  ExplosionInfo explosion;
};

/// Y_{k+1} = Y_k + b(Y_k) dt + dB_k. A path stops (status exploded) at the
/// first knot where |Y| exceeds the top threshold or b(Y) is not finite;
/// later knots repeat the value at that knot and are never used.
EulerResult euler_maruyama(const DriftFn& drift, std::span<const double> x0,
                           const IncrementBatch& inc,
                           const std::vector<double>& thresholds = kDefaultThresholds,
                           std::size_t workers = 1);

/// One Euler solution per drift, all driven by the same increments.
std::vector<EulerResult> coupled_solve(const std::vector<DriftFn>& drifts,
                                       std::span<const double> x0, const IncrementBatch& inc,
                                       const std::vector<double>& thresholds = kDefaultThresholds,
                                       std::size_t workers = 1);

/// Per-knot quantiles of coordinate i over paths alive at that knot;
/// rows are knots, columns follow `probs`. NaN where no path is alive.
std::vector<std::vector<double>> knot_quantiles(const PathBatch& paths, std::size_t i,
                                                const std::vector<double>& probs);

}  // namespace sdecmp
