#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace sdecmp {

/// Uniform discretization 0 = t_0 < t_1 < ... < t_M = T of the horizon.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t n_steps);

  double horizon() const { return horizon_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_knots() const { return n_steps_ + 1; }
  double dt() const { return dt_; }

  /// t_k = k T / M; the last knot is exactly T.
  double time(std::size_t k) const;
  std::vector<double> knots() const;

  /// Knot index of `t` if it lies on the grid (relative tolerance 1e-9).
  std::optional<std::size_t> find_knot(double t) const;
  /// Same as find_knot but throws ConfigError for off-grid times.
  std::size_t knot_at(double t) const;

  /// Grid with `factor` times fewer steps; factor must divide n_steps.
  TimeGrid coarsened(std::size_t factor) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  std::size_t n_steps_;
  double dt_;
};

}  // namespace sdecmp
