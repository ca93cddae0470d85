#include <algorithm>
#include <cmath>
#include <limits>

#include "sdecmp/compare/compare.hpp"
#include "sdecmp/core/errors.hpp"

namespace sdecmp {

std::size_t PathwiseStats::total_violations() const {
  std::size_t n = 0;
  for (const auto& c : coordinates) n += c.n_violations;
  return n;
}

CsvTable PathwiseStats::to_csv(const TimeGrid& grid) const {
  CsvTable t({"knot", "time", "coordinate", "min_gap", "violations"});
  for (std::size_t k = 0; k < grid.n_knots(); ++k) {
    for (const auto& c : coordinates) {
      t.add_row({static_cast<long long>(k), grid.time(k), static_cast<long long>(c.coordinate),
                 c.min_gap_by_knot[k], static_cast<long long>(c.violations_by_knot[k])});
    }
  }
  return t;
}

PathwiseStats pathwise_compare(const PathBatch& a, const PathBatch& b, const ExplosionInfo& up_to,
                               double slack) {
  if (a.n_paths() != b.n_paths() || a.dim() != b.dim() || !(a.grid() == b.grid())) {
    throw InputError("pathwise compare: batch shapes differ");
  }
  const bool has_tau = !up_to.first_crossing.empty();
  if (has_tau && up_to.first_crossing.back().size() != a.n_paths()) {
    throw InputError("pathwise compare: explosion info does not match the batches");
  }
  const std::size_t n_knots = a.grid().n_knots();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  PathwiseStats out;
  out.n_paths = a.n_paths();
  out.slack = slack;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    PathwiseCoordinate c;
    c.coordinate = i;
    c.min_gap = std::numeric_limits<double>::infinity();
    c.min_gap_by_knot.assign(n_knots, nan);
    c.violations_by_knot.assign(n_knots, 0);
    out.coordinates.push_back(std::move(c));
  }

  for (std::size_t p = 0; p < a.n_paths(); ++p) {
    std::size_t last = n_knots - 1;
    if (has_tau) {
      if (const auto& tau = up_to.first_crossing.back()[p]) last = std::min(last, *tau);
    }
    for (std::size_t k = 0; k <= last; ++k) {
      if (!a.alive_at(p, k) || !b.alive_at(p, k)) break;
      ++out.n_compared;
      for (auto& c : out.coordinates) {
        const double gap = a.at(p, k, c.coordinate) - b.at(p, k, c.coordinate);
        c.min_gap = std::min(c.min_gap, gap);
        double& mk = c.min_gap_by_knot[k];
        mk = std::isnan(mk) ? gap : std::min(mk, gap);
        if (gap < -slack) {
          ++c.n_violations;
          ++c.violations_by_knot[k];
          c.max_violation = std::max(c.max_violation, -gap);
        }
      }
    }
  }
  for (auto& c : out.coordinates) {
    if (std::isinf(c.min_gap)) c.min_gap = nan;
  }
  return out;
}

}  // namespace sdecmp
