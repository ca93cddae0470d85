#include <algorithm>
#include <cmath>
#include <limits>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/girsanov/girsanov.hpp"

namespace sdecmp {

namespace {

// Largest argument for which exp() stays finite in double precision.
constexpr double kMaxExponent = 709.0;

}  // namespace

double hill_tail_index(std::vector<double> log_values, std::size_t k) {
  if (k == 0 || k >= log_values.size()) throw InputError("Hill estimator needs 0 < k < n");
  std::nth_element(log_values.begin(), log_values.begin() + static_cast<std::ptrdiff_t>(k),
                   log_values.end(), std::greater<>());
  const double threshold = log_values[k];
  CompensatedSum excess;
  for (std::size_t i = 0; i < k; ++i) excess.add(log_values[i] - threshold);
  const double mean_excess = excess.value() / static_cast<double>(k);
  return mean_excess > 0.0 ? 1.0 / mean_excess : std::numeric_limits<double>::infinity();
}

NovikovEstimate novikov_estimate(const DriftFn& drift, std::span<const double> x,
                                 const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                 const NovikovSettings& settings, std::size_t chunk_size,
                                 std::size_t workers) {
  const std::size_t dim = drift.dim();
  if (x.size() != dim) throw InputError("Novikov point dimension does not match drift");
  if (n_paths < 2) throw ConfigError("novikov: need at least 2 paths");

  // exponent[p] = sum_{j<M} |b(B_{t_j} + x)|^2 dt, from the same streams as sample_increments
  std::vector<double> exponent(n_paths);
  const std::size_t steps = grid.n_steps();
  for_each_chunk(n_paths, chunk_size, workers,
                 [&](std::size_t begin, std::size_t end, std::size_t chunk) {
                   std::vector<double> draws(checked_storage(end - begin, steps * dim));
                   fill_chunk_increments(seed, chunk, grid.dt(), draws);
                   std::vector<double> point(dim), b(dim);
                   for (std::size_t p = begin; p < end; ++p) {
                     std::copy(x.begin(), x.end(), point.begin());
                     const double* dB = draws.data() + (p - begin) * steps * dim;
                     double e = 0.0;
                     for (std::size_t j = 0; j < steps; ++j) {
                       drift(point, b);
                       double sq = 0.0;
                       for (std::size_t i = 0; i < dim; ++i) sq += b[i] * b[i];
                       e += sq * grid.dt();
                       for (std::size_t i = 0; i < dim; ++i) point[i] += dB[j * dim + i];
                     }
                     exponent[p] = std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
                   }
                 });

  NovikovEstimate out;
  out.x.assign(x.begin(), x.end());
  out.n_paths = n_paths;
  out.max_exponent = *std::max_element(exponent.begin(), exponent.end());

  const std::size_t k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::sqrt(static_cast<double>(n_paths))), 10, n_paths - 1);
  if (n_paths > 10 && std::isfinite(out.max_exponent)) {
    const double alpha = hill_tail_index(exponent, k);
    if (std::isfinite(alpha)) out.tail_index = alpha;
  }

  const double shift = out.max_exponent;
  if (!std::isfinite(shift) || shift > kMaxExponent) {
    const auto overflowing = static_cast<std::size_t>(std::count_if(
        exponent.begin(), exponent.end(), [](double e) { return !(e <= kMaxExponent); }));
    out.overflow_quantile = 1.0 - static_cast<double>(overflowing) / static_cast<double>(n_paths);
    out.estimate = std::numeric_limits<double>::infinity();
    out.se = std::numeric_limits<double>::infinity();
    out.log_estimate = std::isfinite(shift) ? log_sum_exp(exponent) - std::log(static_cast<double>(n_paths))
                                            : std::numeric_limits<double>::infinity();
    out.max_share = std::isfinite(shift) ? std::exp(shift - (out.log_estimate + std::log(static_cast<double>(n_paths))))
                                         : 1.0;
    out.verdict = Verdict::fail;
    out.reasons.push_back("exponent overflows above path quantile " +
                          std::to_string(*out.overflow_quantile));
    return out;
  }

  // Work relative to the largest summand so nothing overflows.
  std::vector<double> rel(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) rel[p] = std::exp(exponent[p] - shift);
  const MeanSe m = mean_se(rel);
  const double scale = std::exp(shift);
  out.estimate = m.mean * scale;
  out.se = m.se * scale;
  out.log_estimate = std::log(m.mean) + shift;
  out.max_share = 1.0 / compensated_sum(rel);

  if (out.max_share > settings.fail_share) {
    out.verdict = Verdict::fail;
    out.reasons.push_back("largest path carries " + std::to_string(out.max_share) +
                          " of the total");
  } else if (out.max_share > settings.warn_share) {
    out.verdict = Verdict::warn;
    out.reasons.push_back("largest path carries " + std::to_string(out.max_share) +
                          " of the total");
  }
  if (out.tail_index) {
    if (*out.tail_index < 1.0) {
      out.verdict = Verdict::fail;
      out.reasons.push_back("tail index " + std::to_string(*out.tail_index) +
                            " < 1: mean likely infinite");
    } else if (*out.tail_index < 2.0) {
      if (out.verdict == Verdict::pass) out.verdict = Verdict::warn;
      out.reasons.push_back("tail index " + std::to_string(*out.tail_index) +
                            " < 2: variance likely infinite, SE unreliable");
    }
  }
  if (out.estimate > 0.0 && out.se / out.estimate > settings.se_ratio) {
    if (out.verdict == Verdict::pass) out.verdict = Verdict::warn;
    out.reasons.push_back("relative standard error " + std::to_string(out.se / out.estimate) +
                          " above threshold");
  }
  return out;
}

}  // namespace sdecmp
