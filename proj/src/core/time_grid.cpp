#include "sdecmp/core/time_grid.hpp"

#include <cmath>
#include <string>

#include "sdecmp/core/errors.hpp"

namespace sdecmp {

TimeGrid::TimeGrid(double horizon, std::size_t n_steps)
    : horizon_(horizon), n_steps_(n_steps), dt_(horizon / static_cast<double>(n_steps)) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("time grid: horizon must be positive and finite");
  }
  if (n_steps == 0) throw ConfigError("time grid: n_steps must be positive");
}

double TimeGrid::time(std::size_t k) const {
  if (k >= n_steps_) return horizon_;
  return horizon_ * static_cast<double>(k) / static_cast<double>(n_steps_);
}

std::vector<double> TimeGrid::knots() const {
  std::vector<double> out(n_knots());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = time(k);
  return out;
}

std::optional<std::size_t> TimeGrid::find_knot(double t) const {
  if (!std::isfinite(t)) return std::nullopt;
  const double scaled = t / dt_;
  const double k = std::round(scaled);
  if (k < 0.0 || k > static_cast<double>(n_steps_)) return std::nullopt;
  if (std::abs(scaled - k) > 1e-9 * std::max(1.0, k)) return std::nullopt;
  return static_cast<std::size_t>(k);
}

std::size_t TimeGrid::knot_at(double t) const {
  if (auto k = find_knot(t)) return *k;
  throw ConfigError("time " + std::to_string(t) + " is not a knot of the grid (dt = " +
                    std::to_string(dt_) + ")");
}

TimeGrid TimeGrid::coarsened(std::size_t factor) const {
  if (factor == 0 || n_steps_ % factor != 0) {
    throw ConfigError("coarsening factor must divide the number of steps");
  }
  return TimeGrid(horizon_, n_steps_ / factor);
}

}  // namespace sdecmp
