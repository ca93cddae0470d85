#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/time_grid.hpp"

namespace sdecmp {

enum class PathStatus : std::uint8_t {
  alive,
  exploded,  // crossed the top threshold (or hit a non-finite drift) at `knot`
  excluded,  // dropped from estimators (non-finite drift along the path)
};

struct PathState {
  PathStatus status = PathStatus::alive;
  std::size_t knot = 0;  // meaningful unless alive
};

/// Read-only view of one path: knot values plus the starting point.
struct PathView {
  std::span<const double> values;  // n_knots * dim
  std::span<const double> origin;
  std::size_t dim;

  std::span<const double> point(std::size_t k) const { return values.subspan(k * dim, dim); }
  double at(std::size_t k, std::size_t i) const { return values[k * dim + i]; }
  std::size_t n_knots() const { return values.size() / dim; }
};

/// Ensemble of paths on a grid, laid out [path][knot][coordinate].
/// Immutable once built.
class PathBatch {
 public:
  PathBatch(TimeGrid grid, std::size_t n_paths, std::size_t dim, std::vector<double> origin,
            std::vector<double> values, std::vector<PathState> states);

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> origin() const { return origin_; }

  std::span<const double> point(std::size_t p, std::size_t k) const {
    return {values_.data() + p * stride() + k * dim_, dim_};
  }
  double at(std::size_t p, std::size_t k, std::size_t i) const {
    return values_[p * stride() + k * dim_ + i];
  }
  PathView view(std::size_t p) const {
    return {{values_.data() + p * stride(), stride()}, origin_, dim_};
  }

  const PathState& state(std::size_t p) const { return states_[p]; }
  std::span<const PathState> states() const { return states_; }
  /// True if knot k is at or before the path's explosion knot.
  bool alive_at(std::size_t p, std::size_t k) const;
  bool included(std::size_t p) const { return states_[p].status != PathStatus::excluded; }
  std::size_t count(PathStatus status) const;

 private:
  std::size_t stride() const { return grid_.n_knots() * dim_; }

  TimeGrid grid_;
  std::size_t n_paths_;
  std::size_t dim_;
  std::vector<double> origin_;
  std::vector<double> values_;
  std::vector<PathState> states_;
};

/// values[k] = x0 + sum_{j<k} increments[j]; all paths alive.
PathBatch accumulate_paths(const IncrementBatch& inc, std::span<const double> x0);

}  // namespace sdecmp
