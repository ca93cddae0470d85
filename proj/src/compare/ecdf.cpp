#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdecmp/compare/compare.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/stats.hpp"

namespace sdecmp {

WeightedEcdf::WeightedEcdf(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw InputError("ecdf: values and weights differ in size");
  if (values.empty()) throw DegenerateError("ecdf: empty sample");
  double total = 0.0;
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (!std::isfinite(values[p]) || !std::isfinite(weights[p]) || weights[p] < 0.0) {
      throw DegenerateError("ecdf: non-finite value or invalid weight");
    }
    total += weights[p];
  }
  if (!(total > 0.0)) throw DegenerateError("ecdf: weights sum to zero");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  values_.reserve(order.size());
  cum_w_.reserve(order.size());
  cum_w2_.reserve(order.size());
  CompensatedSum s1, s2;
  for (std::size_t p : order) {
    const double w = weights[p] / total;
    s1.add(w);
    s2.add(w * w);
    values_.push_back(values[p]);
    cum_w_.push_back(s1.value());
    cum_w2_.push_back(s2.value());
  }
  cum_w_.back() = 1.0;
  ess_ = 1.0 / cum_w2_.back();
}

std::size_t WeightedEcdf::count_le(double q) const {
  return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), q) - values_.begin());
}

double WeightedEcdf::operator()(double q) const {
  const std::size_t k = count_le(q);
  return k == 0 ? 0.0 : cum_w_[k - 1];
}

double WeightedEcdf::se(double q) const {
  const std::size_t k = count_le(q);
  const double f = k == 0 ? 0.0 : cum_w_[k - 1];
  const double le = k == 0 ? 0.0 : cum_w2_[k - 1];
  const double gt = cum_w2_.back() - le;
  return std::sqrt(std::max(0.0, le * (1.0 - f) * (1.0 - f) + gt * f * f));
}

double WeightedEcdf::quantile(double p) const {
  const auto it = std::lower_bound(cum_w_.begin(), cum_w_.end(), std::clamp(p, 0.0, 1.0));
  return values_[std::min<std::size_t>(static_cast<std::size_t>(it - cum_w_.begin()), values_.size() - 1)];
}

WeightedEcdf weighted_ecdf(const WeightedSampleSet& samples, std::size_t coordinate, double ess_floor) {
  if (coordinate >= samples.dim()) throw InputError("ecdf: coordinate out of range");
  const double ess = samples.ess();
  if (!(ess >= ess_floor)) {
    throw DegenerateError("ecdf: effective sample size " + std::to_string(ess) + " below floor " +
                          std::to_string(ess_floor));
  }
  const std::vector<double> values = samples.coordinate(coordinate);
  return WeightedEcdf(values, samples.weights());
}

}  // namespace sdecmp
