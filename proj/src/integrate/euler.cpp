#include <algorithm>
#include <cmath>
#include <limits>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/integrate/integrate.hpp"

namespace sdecmp {

EulerResult euler_maruyama(const DriftFn& drift, std::span<const double> x0,
                           const IncrementBatch& inc, const std::vector<double>& thresholds,
                           std::size_t workers) {
  const std::size_t dim = inc.dim();
  if (drift.dim() != dim || x0.size() != dim) throw InputError("euler: dimension mismatch");
  for (std::size_t l = 0; l < thresholds.size(); ++l) {
    if (!(thresholds[l] > 0.0) || (l > 0 && thresholds[l] <= thresholds[l - 1])) {
      throw ConfigError("euler: thresholds must be positive and increasing");
    }
  }
  const TimeGrid& grid = inc.grid();
  const std::size_t knots = grid.n_knots();
  const std::size_t n = inc.n_paths();
  const std::size_t levels = thresholds.size();

  std::vector<double> values(checked_storage(n, knots * dim));
  std::vector<PathState> states(n);
  ExplosionInfo info;
  info.levels = thresholds;
  info.first_crossing.assign(levels, std::vector<std::optional<std::size_t>>(n));
  std::vector<std::uint8_t> nonfinite(n, 0);

  for_each_chunk(n, inc.chunk_size(), workers, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> b(dim);
    for (std::size_t p = begin; p < end; ++p) {
      double* y = values.data() + p * knots * dim;
      std::copy(x0.begin(), x0.end(), y);
      std::size_t next_level = 0;
      std::size_t k = 0;
      for (;; ++k) {
        const std::span<const double> yk(y + k * dim, dim);
        double norm2 = 0.0;
        for (double v : yk) norm2 += v * v;
        const double norm = std::sqrt(norm2);
        while (next_level < levels && !(norm <= thresholds[next_level])) {
          info.first_crossing[next_level++][p] = k;
        }
        if (levels > 0 && next_level == levels) {
          states[p] = {PathStatus::exploded, k};
          break;
        }
        if (k + 1 == knots) break;
        drift(yk, b);
        if (!std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); })) {
          states[p] = {PathStatus::exploded, k};
          nonfinite[p] = 1;
          break;
        }
        const auto dB = inc.step(p, k);
        for (std::size_t i = 0; i < dim; ++i) y[(k + 1) * dim + i] = yk[i] + b[i] * grid.dt() + dB[i];
      }
      for (std::size_t j = k + 1; j < knots; ++j) std::copy_n(y + k * dim, dim, y + j * dim);
    }
  });

  info.n_nonfinite = static_cast<std::size_t>(std::count(nonfinite.begin(), nonfinite.end(), 1));
  for (std::size_t l = 0; l < levels; ++l) {
    LevelSummary s;
    s.level = thresholds[l];
    std::vector<double> taus;
    for (const auto& c : info.first_crossing[l]) {
      if (c) taus.push_back(grid.time(*c));
    }
    s.n_crossed = taus.size();
    s.fraction = static_cast<double>(taus.size()) / static_cast<double>(n);
    if (!taus.empty()) {
      s.tau_q10 = quantile(taus, 0.1);
      s.tau_median = quantile(taus, 0.5);
      s.tau_q90 = quantile(taus, 0.9);
    }
    info.summaries.push_back(s);
  }
  return {PathBatch(grid, n, dim, std::vector<double>(x0.begin(), x0.end()), std::move(values),
                    std::move(states)),
          std::move(info)};
}

std::vector<EulerResult> coupled_solve(const std::vector<DriftFn>& drifts,
                                       std::span<const double> x0, const IncrementBatch& inc,
                                       const std::vector<double>& thresholds, std::size_t workers) {
  std::vector<EulerResult> out;
  out.reserve(drifts.size());
  for (const auto& d : drifts) out.push_back(euler_maruyama(d, x0, inc, thresholds, workers));
  return out;
}

std::vector<std::vector<double>> knot_quantiles(const PathBatch& paths, std::size_t i,
                                                const std::vector<double>& probs) {
  if (i >= paths.dim()) throw InputError("knot_quantiles: coordinate out of range");
  const std::size_t knots = paths.grid().n_knots();
  std::vector<std::vector<double>> table(knots, std::vector<double>(probs.size()));
  std::vector<double> column;
  column.reserve(paths.n_paths());
  for (std::size_t k = 0; k < knots; ++k) {
    column.clear();
    for (std::size_t p = 0; p < paths.n_paths(); ++p) {
      if (paths.alive_at(p, k) && paths.included(p)) column.push_back(paths.at(p, k, i));
    }
    std::sort(column.begin(), column.end());
    for (std::size_t q = 0; q < probs.size(); ++q) {
      table[k][q] = column.empty() ? std::numeric_limits<double>::quiet_NaN() : quantile(column, probs[q]);
    }
  }
  return table;
}

}  // namespace sdecmp
