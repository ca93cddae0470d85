#include "sdecmp/core/paths.hpp"

#include <algorithm>

#include "sdecmp/core/errors.hpp"

namespace sdecmp {

PathBatch::PathBatch(TimeGrid grid, std::size_t n_paths, std::size_t dim,
                     std::vector<double> origin, std::vector<double> values,
                     std::vector<PathState> states)
    : grid_(grid),
      n_paths_(n_paths),
      dim_(dim),
      origin_(std::move(origin)),
      values_(std::move(values)),
      states_(std::move(states)) {
  if (origin_.size() != dim_) throw InputError("path batch: origin has wrong dimension");
  if (values_.size() != n_paths_ * grid_.n_knots() * dim_) {
    throw InputError("path batch: value storage does not match shape");
  }
  if (states_.size() != n_paths_) throw InputError("path batch: one state per path required");
}

bool PathBatch::alive_at(std::size_t p, std::size_t k) const {
  const PathState& s = states_[p];
  switch (s.status) {
    case PathStatus::alive:
      return true;
    case PathStatus::exploded:
      return k <= s.knot;
    case PathStatus::excluded:
      return false;
  }
  return false;
}

std::size_t PathBatch::count(PathStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      states_.begin(), states_.end(), [&](const PathState& s) { return s.status == status; }));
}

PathBatch accumulate_paths(const IncrementBatch& inc, std::span<const double> x0) {
  if (x0.size() != inc.dim()) throw InputError("accumulate_paths: x0 dimension mismatch");
  const TimeGrid& grid = inc.grid();
  const std::size_t dim = inc.dim();
  const std::size_t stride = grid.n_knots() * dim;
  std::vector<double> values(checked_storage(inc.n_paths(), stride));
  for (std::size_t p = 0; p < inc.n_paths(); ++p) {
    double* row = values.data() + p * stride;
    std::copy(x0.begin(), x0.end(), row);
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
      const auto dB = inc.step(p, k);
      for (std::size_t i = 0; i < dim; ++i) row[(k + 1) * dim + i] = row[k * dim + i] + dB[i];
    }
  }
  return PathBatch(grid, inc.n_paths(), dim, std::vector<double>(x0.begin(), x0.end()),
                   std::move(values), std::vector<PathState>(inc.n_paths()));
}

}  // namespace sdecmp
