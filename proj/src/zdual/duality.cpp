#include "sdecmp/zdual/duality.hpp"

#include <algorithm>
#include <cmath>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/integrate/integrate.hpp"

namespace sdecmp {

namespace {

constexpr std::uint64_t kBootstrapTag = 0xb007;

EstimateWithCI from_mean_se(const MeanSe& m, double n_effective) {
  return {m.mean, m.se, n_effective, 0.95};
}

}  // namespace

double EstimateWithCI::lower() const { return estimate - normal_critical(confidence) * se; }
double EstimateWithCI::upper() const { return estimate + normal_critical(confidence) * se; }

DualityBatch::DualityBatch(const DriftFn& drift, std::span<const double> x, IncrementBatch inc,
                           double ess_floor, std::size_t workers)
    : drift_(drift),
      inc_(std::move(inc)),
      paths_(accumulate_paths(inc_, x)),
      shifted_(shift_paths(paths_, drift_, workers)),
      weights_(girsanov_weights(drift_, paths_, inc_, ess_floor, workers)) {}

DualityBatch DualityBatch::sample(const DriftFn& drift, std::span<const double> x,
                                  const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                  std::size_t chunk_size, double ess_floor, std::size_t workers) {
  return DualityBatch(drift, x, sample_increments(grid, n_paths, drift.dim(), seed, chunk_size, workers),
                      ess_floor, workers);
}

std::vector<double> pairing_terms(const DualityBatch& batch, const PathFunctional& X,
                                  const PathFunctional& Y) {
  std::vector<double> terms(batch.n_paths(), 0.0);
  for_each_chunk(batch.n_paths(), kDefaultChunkSize, 1,
                 [&](std::size_t begin, std::size_t end, std::size_t) {
                   for (std::size_t p = begin; p < end; ++p) {
                     if (!batch.included(p)) continue;
                     terms[p] = X.evaluate(batch.paths().view(p), batch.grid()) *
                                batch.weights().weight(p) *
                                Y.evaluate(batch.shifted().view(p), batch.grid());
                   }
                 });
  return terms;
}

Pairing pairing(const DualityBatch& batch, const PathFunctional& X, const PathFunctional& Y) {
  const std::vector<double> terms = pairing_terms(batch, X, Y);
  const std::vector<double> w = batch.weights().terminal_weights();
  const double ess = effective_sample_size(w);
  Pairing out;
  out.self_normalized = from_mean_se(ratio_mean_se(terms, w), ess);
  out.unnormalized = from_mean_se(mean_se(terms), ess);
  return out;
}

std::vector<Pairing> pairing_estimate(const DualityBatch& batch, std::size_t knot,
                                      const PathFunctional& Y) {
  if (knot >= batch.grid().n_knots()) throw ConfigError("pairing: knot outside the grid");
  const double t = batch.grid().time(knot);
  std::vector<Pairing> out;
  for (std::size_t i = 0; i < batch.dim(); ++i) {
    out.push_back(pairing(batch, PathFunctional::coordinate(t, i), Y));
  }
  return out;
}

EstimateWithCI strong_expectation(const PathBatch& solution, const PathBatch& noise,
                                  const PathFunctional& X, const PathFunctional& Y) {
  if (solution.n_paths() != noise.n_paths() || !(solution.grid() == noise.grid())) {
    throw InputError("strong expectation: batches differ in shape");
  }
  std::vector<double> terms;
  terms.reserve(solution.n_paths());
  for (std::size_t p = 0; p < solution.n_paths(); ++p) {
    if (solution.state(p).status != PathStatus::alive) continue;
    terms.push_back(X.evaluate(solution.view(p), solution.grid()) *
                    Y.evaluate(noise.view(p), noise.grid()));
  }
  return from_mean_se(mean_se(terms), static_cast<double>(terms.size()));
}

WeightedSampleSet::WeightedSampleSet(std::size_t dim, std::vector<double> values,
                                     std::vector<double> weights, std::size_t knot, double time,
                                     std::vector<double> origin)
    : dim_(dim), values_(std::move(values)), weights_(std::move(weights)), knot_(knot), time_(time),
      origin_(std::move(origin)) {
  if (dim_ == 0 || values_.size() != weights_.size() * dim_) {
    throw InputError("weighted samples: values and weights disagree");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("weighted samples: weights must be positive");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("weighted samples: values must be finite");
  }
}

WeightedSampleSet WeightedSampleSet::unweighted(const PathBatch& paths, std::size_t knot) {
  std::vector<double> values, weights;
  for (std::size_t p = 0; p < paths.n_paths(); ++p) {
    if (!paths.alive_at(p, knot)) continue;
    const auto x = paths.point(p, knot);
    values.insert(values.end(), x.begin(), x.end());
    weights.push_back(1.0);
  }
  return WeightedSampleSet(paths.dim(), std::move(values), std::move(weights), knot,
                           paths.grid().time(knot),
                           std::vector<double>(paths.origin().begin(), paths.origin().end()));
}

std::vector<double> WeightedSampleSet::coordinate(std::size_t i) const {
  std::vector<double> out(size());
  for (std::size_t p = 0; p < size(); ++p) out[p] = value(p, i);
  return out;
}

double WeightedSampleSet::ess() const { return effective_sample_size(weights_); }
double WeightedSampleSet::weight_sum() const { return compensated_sum(weights_); }

WeightedSampleSet weak_law_samples(const DualityBatch& batch, std::size_t knot) {
  if (knot >= batch.grid().n_knots()) throw ConfigError("weak law: knot outside the grid");
  std::vector<double> values, weights;
  values.reserve(batch.n_paths() * batch.dim());
  weights.reserve(batch.n_paths());
  for (std::size_t p = 0; p < batch.n_paths(); ++p) {
    if (!batch.included(p)) continue;
    const auto x = batch.paths().point(p, knot);
    values.insert(values.end(), x.begin(), x.end());
    weights.push_back(batch.weights().weight_at(p, knot));
  }
  return WeightedSampleSet(batch.dim(), std::move(values), std::move(weights), knot,
                           batch.grid().time(knot),
                           std::vector<double>(batch.origin().begin(), batch.origin().end()));
}

namespace {

double weighted_moment(const WeightedSampleSet& s, std::size_t i, unsigned order, bool central,
                       std::span<const std::size_t> index) {
  CompensatedSum wsum, m1;
  for (std::size_t p : index) {
    wsum.add(s.weights()[p]);
    m1.add(s.weights()[p] * s.value(p, i));
  }
  const double mean = m1.value() / wsum.value();
  if (order == 1 && !central) return mean;
  const double center = central ? mean : 0.0;
  CompensatedSum mr;
  for (std::size_t p : index) mr.add(s.weights()[p] * std::pow(s.value(p, i) - center, order));
  return mr.value() / wsum.value();
}

}  // namespace

std::vector<EstimateWithCI> z_moment(const WeightedSampleSet& samples, unsigned order, bool central,
                                     std::size_t n_bootstrap, std::uint64_t seed) {
  if (order < 1) throw ConfigError("z_moment: order must be at least 1");
  const double ess = samples.ess();
  if (!(ess >= 2.0)) throw DegenerateError("z_moment: effective sample size below 2");
  const std::size_t n = samples.size();
  std::vector<std::size_t> all(n);
  for (std::size_t p = 0; p < n; ++p) all[p] = p;

  std::vector<EstimateWithCI> out;
  for (std::size_t i = 0; i < samples.dim(); ++i) {
    EstimateWithCI e;
    e.estimate = weighted_moment(samples, i, order, central, all);
    e.n_effective = ess;
    if (n_bootstrap >= 2) {
      std::vector<double> reps(n_bootstrap);
      const std::uint64_t key = derive_seed(seed, kBootstrapTag + i);
      std::vector<std::size_t> index(n);
      for (std::size_t b = 0; b < n_bootstrap; ++b) {
        Philox4x32 rng(key, b);
        for (auto& ix : index) ix = rng.below(n);
        reps[b] = weighted_moment(samples, i, order, central, index);
      }
      e.se = mean_se(reps).se * std::sqrt(static_cast<double>(n_bootstrap));
    }
    out.push_back(e);
  }
  return out;
}

EstimateWithCI left_inverse_residual(const DualityBatch& batch, const PathFunctional& U,
                                     const PathFunctional& Y) {
  if (!U.bounded()) throw InputError("left-inverse residual: U must be bounded");
  std::vector<double> diffs;
  diffs.reserve(batch.n_paths());
  for (std::size_t p = 0; p < batch.n_paths(); ++p) {
    if (!batch.included(p)) continue;
    const auto shifted = batch.shifted().view(p);
    const auto plain = batch.paths().view(p);
    const double lhs = U.evaluate(shifted, batch.grid()) * Y.evaluate(shifted, batch.grid()) *
                       batch.weights().weight(p);
    const double rhs = U.evaluate(plain, batch.grid()) * Y.evaluate(plain, batch.grid());
    diffs.push_back(lhs - rhs);
  }
  return from_mean_se(mean_se(diffs), batch.weights().diagnostics().ess);
}

bool JensenReport::all_hold() const {
  return std::all_of(cases.begin(), cases.end(), [](const JensenCase& c) { return c.holds; });
}

JensenReport jensen_gap(const DualityBatch& batch, const ScalarMap& phi, const PathFunctional& X,
                        const std::vector<PathFunctional>& Ys, const IncrementBatch& strong_inc,
                        std::size_t workers) {
  if (!batch.drift().traits().lipschitz) {
    throw UnsupportedError("jensen_gap: Z(X) is only samplable pathwise for Lipschitz drifts");
  }
  if (!phi.convex()) throw InputError("jensen_gap: phi must be convex");
  if (!(strong_inc.grid() == batch.grid()) || strong_inc.dim() != batch.dim()) {
    throw InputError("jensen_gap: strong increments do not match the batch");
  }
  const auto euler = euler_maruyama(batch.drift(), batch.origin(), strong_inc, kDefaultThresholds, workers);
  const PathBatch noise = accumulate_paths(strong_inc, batch.origin());
  const PathFunctional phi_x = X.mapped(phi);

  JensenReport report;
  for (const auto& Y : Ys) {
    if (!Y.nonnegative()) throw InputError("jensen_gap: test functionals Y must be nonnegative");
    JensenCase c;
    c.label = phi.name() + "(" + X.describe() + ") vs " + Y.describe();
    c.weak_side = pairing(batch, phi_x, Y).self_normalized;
    c.strong_side = strong_expectation(euler.paths, noise, phi_x, Y);
    c.gap = c.weak_side.estimate - c.strong_side.estimate;
    c.se = std::hypot(c.weak_side.se, c.strong_side.se);
    c.holds = c.gap >= -5.0 * c.se;
    report.cases.push_back(c);
  }
  return report;
}

}  // namespace sdecmp
