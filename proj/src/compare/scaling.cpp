#include <algorithm>
#include <cmath>

#include "sdecmp/compare/compare.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/core/stats.hpp"

namespace sdecmp {

namespace {

constexpr std::uint64_t kScalingTag = 0x5ca1;

struct Line {
  double slope;
  double intercept;
};

Line ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    mx += x[j];
    my += y[j];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxy += (x[j] - mx) * (y[j] - my);
    sxx += (x[j] - mx) * (x[j] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

CsvTable ScalingFit::to_csv() const {
  CsvTable t({"lag", "moment", "se", "log_lag", "log_moment"});
  for (std::size_t j = 0; j < lags.size(); ++j) {
    t.add_row({lags[j], moments[j].estimate, moments[j].se, std::log(lags[j]), std::log(moments[j].estimate)});
  }
  return t;
}

ScalingFit kolmogorov_scaling(const DriftFn& drift, std::span<const double> x0,
                              const IncrementBatch& inc, const ScalingOptions& options) {
  if (!drift.traits().lipschitz) {
    throw UnsupportedError("kolmogorov scaling: needs a Lipschitz drift for a strong solution");
  }
  std::vector<std::size_t> lags = options.lags.empty() ? kDefaultScalingLags : options.lags;
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  if (lags.size() < 4) throw ConfigError("kolmogorov scaling: needs at least 4 distinct lags");
  if (lags.front() == 0) throw ConfigError("kolmogorov scaling: lags must be positive");
  const TimeGrid& grid = inc.grid();
  const std::size_t anchor = grid.knot_at(options.anchor);
  if (anchor + lags.back() > grid.n_steps()) {
    throw ConfigError("kolmogorov scaling: anchor + largest lag exceeds the horizon");
  }

  const auto euler = euler_maruyama(drift, x0, inc, kDefaultThresholds, options.workers);
  const PathBatch& z = euler.paths;
  const std::size_t m = lags.size();
  const std::size_t last = anchor + lags.back();
  std::vector<double> cubes;  // [path][lag]
  for (std::size_t p = 0; p < z.n_paths(); ++p) {
    if (!z.alive_at(p, last)) continue;
    for (std::size_t lag : lags) {
      double sq = 0.0;
      for (std::size_t i = 0; i < z.dim(); ++i) {
        const double d = z.at(p, anchor + lag, i) - z.at(p, anchor, i);
        sq += d * d;
      }
      cubes.push_back(sq * std::sqrt(sq));
    }
  }
  const std::size_t n = cubes.size() / m;
  if (n < 2) throw DegenerateError("kolmogorov scaling: fewer than 2 usable paths");

  ScalingFit fit;
  fit.n_paths = n;
  std::vector<double> log_lag(m), log_moment(m);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t p = 0; p < n; ++p) column[p] = cubes[p * m + j];
    const MeanSe ms = mean_se(column);
    fit.lags.push_back(static_cast<double>(lags[j]) * grid.dt());
    fit.moments.push_back({ms.mean, ms.se, static_cast<double>(n), 0.95});
    log_lag[j] = std::log(fit.lags.back());
    log_moment[j] = std::log(ms.mean);
  }
  const Line line = ols(log_lag, log_moment);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.ci_lower = fit.ci_upper = fit.slope;

  if (options.n_bootstrap >= 2) {
    std::vector<double> slopes(options.n_bootstrap);
    const std::uint64_t key = derive_seed(options.seed, kScalingTag);
    for_each_chunk(options.n_bootstrap, 8, options.workers, [&](std::size_t begin, std::size_t end, std::size_t) {
      std::vector<double> sums(m), logs(m);
      for (std::size_t b = begin; b < end; ++b) {
        Philox4x32 rng(key, b);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t d = 0; d < n; ++d) {
          const std::size_t p = rng.below(n);
          for (std::size_t j = 0; j < m; ++j) sums[j] += cubes[p * m + j];
        }
        for (std::size_t j = 0; j < m; ++j) logs[j] = std::log(sums[j] / static_cast<double>(n));
        slopes[b] = ols(log_lag, logs).slope;
      }
    });
    fit.ci_lower = quantile(slopes, 0.025);
    fit.ci_upper = quantile(slopes, 0.975);
    fit.slope_se = mean_se(slopes).se * std::sqrt(static_cast<double>(slopes.size()));
  }
  return fit;
}

}  // namespace sdecmp
