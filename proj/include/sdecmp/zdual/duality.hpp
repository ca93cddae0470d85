#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdecmp/core/drift.hpp"
#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/paths.hpp"
#include "sdecmp/girsanov/girsanov.hpp"
#include "sdecmp/zdual/functional.hpp"

namespace sdecmp {

struct EstimateWithCI {
  double estimate = 0.0;
  double se = 0.0;
  double n_effective = 0.0;
  double confidence = 0.95;

  double lower() const;
  double upper() const;
};

/// Brownian paths B + x, their shifts T_{-b}, and the weights E(b), all
/// from one increment batch.
class DualityBatch {
 public:
  DualityBatch(const DriftFn& drift, std::span<const double> x, IncrementBatch inc,
               double ess_floor = 100.0, std::size_t workers = 1);
  /// Samples fresh increments.
  static DualityBatch sample(const DriftFn& drift, std::span<const double> x, const TimeGrid& grid,
                             std::size_t n_paths, std::uint64_t seed,
                             std::size_t chunk_size = kDefaultChunkSize, double ess_floor = 100.0,
                             std::size_t workers = 1);

  const DriftFn& drift() const { return drift_; }
  const TimeGrid& grid() const { return inc_.grid(); }
  std::size_t n_paths() const { return inc_.n_paths(); }
  std::size_t dim() const { return inc_.dim(); }
  const IncrementBatch& increments() const { return inc_; }
  const PathBatch& paths() const { return paths_; }
  const PathBatch& shifted() const { return shifted_; }
  const MeasureWeights& weights() const { return weights_; }
  std::span<const double> origin() const { return paths_.origin(); }
  bool included(std::size_t p) const { return !weights_.excluded(p) && shifted_.included(p); }

  /// Replaces the weights (fault injection in self-tests).
  void set_weights(MeasureWeights w) { weights_ = std::move(w); }

 private:
  DriftFn drift_;
  IncrementBatch inc_;
  PathBatch paths_;
  PathBatch shifted_;
  MeasureWeights weights_;
};

/// Per-path terms X(B + x) * E_T(b) * Y(T_{-b}(B + x)); 0 on excluded paths.
std::vector<double> pairing_terms(const DualityBatch& batch, const PathFunctional& X,
                                  const PathFunctional& Y);

struct Pairing {
  EstimateWithCI self_normalized;  // divided by the mean weight; the headline number
  EstimateWithCI unnormalized;
};

/// Estimate of E[Z(X) Y] = E[X E(b) T_{-b} Y].
Pairing pairing(const DualityBatch& batch, const PathFunctional& X, const PathFunctional& Y);

/// E[Z^i_t Y] for each coordinate i, with X = B^i_t + x_i.
std::vector<Pairing> pairing_estimate(const DualityBatch& batch, std::size_t knot,
                                      const PathFunctional& Y);

/// E[X(strong) Y(noise)] with X on the Euler solution and Y on x + W for
/// the driving noise W; the strong-solution side of the duality.
EstimateWithCI strong_expectation(const PathBatch& solution, const PathBatch& noise,
                                  const PathFunctional& X, const PathFunctional& Y);

/// Weighted sample of the law of Z_t: values B_t + x with weights E_t(b).
class WeightedSampleSet {
 public:
  WeightedSampleSet(std::size_t dim, std::vector<double> values, std::vector<double> weights,
                    std::size_t knot = 0, double time = 0.0, std::vector<double> origin = {});
  /// Unit weights on the alive paths of a batch at a knot.
  static WeightedSampleSet unweighted(const PathBatch& paths, std::size_t knot);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  double value(std::size_t p, std::size_t i) const { return values_[p * dim_ + i]; }
  std::vector<double> coordinate(std::size_t i) const;
  std::span<const double> weights() const { return weights_; }
  std::size_t knot() const { return knot_; }
  double time() const { return time_; }
  std::span<const double> origin() const { return origin_; }
  double ess() const;
  double weight_sum() const;

 private:
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<double> weights_;
  std::size_t knot_;
  double time_;
  std::vector<double> origin_;
};

WeightedSampleSet weak_law_samples(const DualityBatch& batch, std::size_t knot);

/// Self-normalized weighted moment per coordinate, raw or central, with
/// bootstrap standard errors.
std::vector<EstimateWithCI> z_moment(const WeightedSampleSet& samples, unsigned order,
                                     bool central = false, std::size_t n_bootstrap = 200,
                                     std::uint64_t seed = 1);

/// E[T_{-b}(U Y) E(b)] - E[U Y]; zero by the left-inverse identity.
EstimateWithCI left_inverse_residual(const DualityBatch& batch, const PathFunctional& U,
                                     const PathFunctional& Y);

struct JensenCase {
  std::string label;
  EstimateWithCI weak_side;    // E[Z(phi(X)) Y] by duality
  EstimateWithCI strong_side;  // E[phi(Z(X)) Y] on the Euler solution
  double gap = 0.0;
  double se = 0.0;
  bool holds = false;  // gap >= -5 se
};

struct JensenReport {
  std::vector<JensenCase> cases;
  bool all_hold() const;
};

/// Jensen's inequality phi(Z(X)) <= Z(phi(X)) tested against nonnegative Ys.
/// Z(X) is materialized on an Euler solution driven by an independent
/// increment batch `strong_inc`; requires a Lipschitz drift.
JensenReport jensen_gap(const DualityBatch& batch, const ScalarMap& phi, const PathFunctional& X,
                        const std::vector<PathFunctional>& Ys, const IncrementBatch& strong_inc,
                        std::size_t workers = 1);

}  // namespace sdecmp
