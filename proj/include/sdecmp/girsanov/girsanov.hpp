#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdecmp/core/config.hpp"
#include "sdecmp/core/drift.hpp"
#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/paths.hpp"
#include "sdecmp/core/test_function.hpp"

namespace sdecmp {

enum class Verdict { pass, warn, fail };
const char* to_string(Verdict v);

struct WeightDiagnostics {
  double mean_weight = 0.0;
  double mean_weight_se = 0.0;
  double max_share = 0.0;  // largest terminal weight / sum of weights
  double ess = 0.0;
  std::size_t n_used = 0;
  std::size_t n_excluded = 0;
  std::optional<std::string> warning;
};

/// Log stochastic exponentials l_k = log E_{t_k}(gamma) for every path and
/// knot. Excluded paths (non-finite integrand) keep their last finite value
/// and are skipped by every estimator.
class MeasureWeights {
 public:
  MeasureWeights(TimeGrid grid, std::size_t n_paths, std::vector<double> log_series,
                 std::vector<std::uint8_t> excluded, double ess_floor = 0.0);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }

  double log_weight(std::size_t p, std::size_t k) const { return log_[p * grid_.n_knots() + k]; }
  double terminal_log_weight(std::size_t p) const { return log_weight(p, grid_.n_steps()); }
  /// exp(l_M); 0 for excluded paths.
  double weight(std::size_t p) const;
  double weight_at(std::size_t p, std::size_t k) const;
  std::vector<double> terminal_weights() const;

  bool excluded(std::size_t p) const { return excluded_[p] != 0; }
  const WeightDiagnostics& diagnostics() const { return diag_; }

  /// Copy with every terminal log-weight shifted by `delta` (fault injection).
  MeasureWeights perturbed(double delta) const;

 private:
  void diagnose(double ess_floor);

  TimeGrid grid_;
  std::size_t n_paths_;
  std::vector<double> log_;
  std::vector<std::uint8_t> excluded_;
  WeightDiagnostics diag_;
};

/// gamma(t_j) given the knot index and the path point at that knot.
using Integrand = std::function<void(std::size_t knot, std::span<const double> x, std::span<double> out)>;

/// Left-point Ito sums l_k = sum_{j<k} <gamma_j, dB_j> - 1/2 sum_{j<k} |gamma_j|^2 dt.
MeasureWeights stochastic_exponential(const PathBatch& paths, const Integrand& gamma,
                                      const IncrementBatch& inc, std::size_t workers = 1);
MeasureWeights stochastic_exponential(const PathBatch& paths, const DriftFn& drift,
                                      const IncrementBatch& inc, std::size_t workers = 1);
MeasureWeights stochastic_exponential(const PathBatch& paths, const TestFunction& f,
                                      const IncrementBatch& inc, std::size_t workers = 1);

/// E(f) with increments taken from the path itself (dB_j = P_{j+1} - P_j).
/// Applied to shift_paths output this is T_{-b} E(f).
MeasureWeights stochastic_exponential_along(const PathBatch& paths, const TestFunction& f,
                                            std::size_t workers = 1);

/// S_k = P_k - sum_{j<k} b(P_j) dt. Paths hitting a non-finite drift are
/// marked excluded and held constant from that knot.
PathBatch shift_paths(const PathBatch& paths, const DriftFn& drift, std::size_t workers = 1);

/// stochastic_exponential with gamma = b(B); warns when ESS < ess_floor.
MeasureWeights girsanov_weights(const DriftFn& drift, const PathBatch& paths,
                                const IncrementBatch& inc, double ess_floor = 100.0,
                                std::size_t workers = 1);

struct NovikovEstimate {
  std::vector<double> x;
  double estimate = 0.0;  // +inf when the exponent overflows
  double se = 0.0;
  double log_estimate = 0.0;
  std::size_t n_paths = 0;
  double max_share = 0.0;
  std::optional<double> tail_index;  // Hill estimate on the summands
  double max_exponent = 0.0;
  std::optional<double> overflow_quantile;  // quantile level above which exp overflows
  Verdict verdict = Verdict::pass;
  std::vector<std::string> reasons;
};

/// Monte Carlo estimate of E exp(sum_j |b(B_{t_j} + x)|^2 dt), streamed in chunks.
NovikovEstimate novikov_estimate(const DriftFn& drift, std::span<const double> x,
                                 const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                 const NovikovSettings& settings = {},
                                 std::size_t chunk_size = kDefaultChunkSize,
                                 std::size_t workers = 1);

/// Hill estimator of the tail index from log-summands, using the top k.
double hill_tail_index(std::vector<double> log_values, std::size_t k);

}  // namespace sdecmp
