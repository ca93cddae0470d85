#include <algorithm>
#include <cmath>
#include <limits>

#include "sdecmp/compare/compare.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/core/stats.hpp"

namespace sdecmp {

namespace {

constexpr std::uint64_t kDominanceTag = 0xd0a1;

std::vector<double> default_levels() {
  std::vector<double> out;
  for (int k = 1; k <= 19; ++k) out.push_back(0.05 * k);
  return out;
}

struct Probe {
  double q;
  std::string source;
  double level;
};

// Index of the first probe >= v; a sample counts towards F(q_j) iff bin <= j.
std::vector<std::uint32_t> bins_of(std::span<const double> values, const std::vector<double>& qs) {
  std::vector<std::uint32_t> out(values.size());
  for (std::size_t p = 0; p < values.size(); ++p) {
    out[p] = static_cast<std::uint32_t>(std::lower_bound(qs.begin(), qs.end(), values[p]) - qs.begin());
  }
  return out;
}

// F at every probe from a (re)sample given as sample indices.
template <class IndexFn>
void cdf_at_probes(std::span<const std::uint32_t> bins, std::span<const double> w, std::size_t n_draws,
                   IndexFn index, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> mass(out.size() + 1, 0.0);
  double total = 0.0;
  for (std::size_t d = 0; d < n_draws; ++d) {
    const std::size_t p = index(d);
    mass[bins[p]] += w[p];
    total += w[p];
  }
  double run = 0.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    run += mass[j];
    out[j] = total > 0.0 ? run / total : 0.0;
  }
}

DominanceVerdict combine(const std::vector<CoordinateDominance>& cs) {
  bool all_dominate = true;
  for (const auto& c : cs) {
    if (c.verdict == DominanceVerdict::violated) return DominanceVerdict::violated;
    all_dominate = all_dominate && c.verdict == DominanceVerdict::dominates;
  }
  return all_dominate ? DominanceVerdict::dominates : DominanceVerdict::inconclusive;
}

}  // namespace

std::string to_string(DominanceVerdict v) {
  switch (v) {
    case DominanceVerdict::dominates: return "dominates";
    case DominanceVerdict::violated: return "violated";
    case DominanceVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CsvTable DominanceReport::to_csv() const {
  CsvTable t({"coordinate", "source", "level", "quantile", "F_Z", "F_Y", "gap", "gap_lcb", "gap_ucb"});
  for (const auto& p : probes) {
    t.add_row({static_cast<long long>(p.coordinate), p.source, p.level, p.q, p.f_z, p.f_y, p.gap,
               p.gap_lcb, p.gap_ucb});
  }
  return t;
}

DominanceReport dominance_check(const WeightedSampleSet& z, const WeightedSampleSet& y,
                                const DominanceSettings& settings) {
  if (z.dim() != y.dim()) throw InputError("dominance: Z and Y dimensions differ");
  if (!(settings.tolerance >= 0.0)) throw ConfigError("dominance: tolerance must be nonnegative");

  DominanceReport r;
  r.knot = z.knot();
  r.time = z.time();
  r.tolerance = settings.tolerance;
  r.n_z = z.size();
  r.n_y = y.size();
  r.n_y_total = y.size();
  r.n_bootstrap = settings.n_bootstrap;
  if (z.size() == 0 || y.size() == 0) {
    r.explanation = z.size() == 0 ? "no Z samples" : "no Y samples";
    return r;
  }
  r.ess_z = z.ess();
  const double ess = std::min(r.ess_z, y.ess());
  r.effective_tolerance = std::max({settings.tolerance, 0.01, 1.0 / std::sqrt(ess)});
  if (ess < settings.ess_floor) {
    r.explanation = "effective sample size " + format_double(ess) + " below floor " +
                    format_double(settings.ess_floor);
    return r;
  }

  const std::vector<double> levels = settings.levels.empty() ? default_levels() : settings.levels;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    const std::vector<double> zv = z.coordinate(i);
    const std::vector<double> yv = y.coordinate(i);
    const WeightedEcdf fz(zv, z.weights());
    const WeightedEcdf fy(yv, y.weights());

    std::vector<Probe> probes;
    for (double l : levels) probes.push_back({fz.quantile(l), "z_quantile", l});
    for (int d = 1; d <= 9; ++d) probes.push_back({fy.quantile(0.1 * d), "y_decile", 0.1 * d});
    std::stable_sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.q < b.q; });
    std::vector<double> qs;
    for (const auto& p : probes) qs.push_back(p.q);
    const std::size_t m = qs.size();

    const auto zb = bins_of(zv, qs);
    const auto yb = bins_of(yv, qs);
    const std::size_t nb = settings.n_bootstrap;
    std::vector<double> reps(nb * m);
    const std::uint64_t key = derive_seed(settings.seed, kDominanceTag + i);
    for_each_chunk(nb, 8, settings.workers, [&](std::size_t begin, std::size_t end, std::size_t) {
      std::vector<double> cz(m), cy(m);
      for (std::size_t b = begin; b < end; ++b) {
        Philox4x32 rng(key, b);
        cdf_at_probes(zb, z.weights(), zb.size(), [&](std::size_t) { return rng.below(zb.size()); }, cz);
        cdf_at_probes(yb, y.weights(), yb.size(), [&](std::size_t) { return rng.below(yb.size()); }, cy);
        for (std::size_t j = 0; j < m; ++j) reps[b * m + j] = cz[j] - cy[j];
      }
    });

    CoordinateDominance c;
    c.coordinate = i;
    c.max_gap = c.max_ucb = c.max_lcb = -std::numeric_limits<double>::infinity();
    c.min_lcb = std::numeric_limits<double>::infinity();
    std::vector<double> column(nb);
    for (std::size_t j = 0; j < m; ++j) {
      DominanceProbe p;
      p.coordinate = i;
      p.source = probes[j].source;
      p.level = probes[j].level;
      p.q = qs[j];
      p.f_z = fz(qs[j]);
      p.f_y = fy(qs[j]);
      p.gap = p.f_z - p.f_y;
      if (nb >= 2) {
        for (std::size_t b = 0; b < nb; ++b) column[b] = reps[b * m + j];
        p.gap_lcb = quantile(column, 0.05);
        p.gap_ucb = quantile(column, 0.95);
      } else {
        p.gap_lcb = p.gap_ucb = p.gap;
      }
      c.max_gap = std::max(c.max_gap, p.gap);
      c.max_ucb = std::max(c.max_ucb, p.gap_ucb);
      c.max_lcb = std::max(c.max_lcb, p.gap_lcb);
      c.min_lcb = std::min(c.min_lcb, p.gap_lcb);
      r.probes.push_back(std::move(p));
    }
    const double tol = r.effective_tolerance;
    if (c.max_ucb <= tol) {
      c.verdict = DominanceVerdict::dominates;
    } else if (c.max_lcb > tol) {
      c.verdict = DominanceVerdict::violated;
    } else {
      c.verdict = DominanceVerdict::inconclusive;
    }
    c.equality = c.max_ucb <= tol && c.min_lcb >= -tol;
    r.coordinates.push_back(c);
  }
  r.verdict = combine(r.coordinates);
  r.equality = !r.coordinates.empty() &&
               std::all_of(r.coordinates.begin(), r.coordinates.end(),
                           [](const CoordinateDominance& c) { return c.equality; });
  return r;
}

DominanceReport dominance_check(const WeightedSampleSet& z, const PathBatch& y, std::size_t knot,
                                const DominanceSettings& settings) {
  if (knot >= y.grid().n_knots()) throw ConfigError("dominance: knot outside the Y grid");
  if (z.dim() != y.dim()) throw InputError("dominance: Z and Y dimensions differ");
  std::size_t alive = 0;
  for (std::size_t p = 0; p < y.n_paths(); ++p) alive += y.alive_at(p, knot);
  if (alive == 0) {
    DominanceReport r;
    r.knot = knot;
    r.time = y.grid().time(knot);
    r.tolerance = settings.tolerance;
    r.n_z = z.size();
    r.n_y_total = y.n_paths();
    r.surviving_fraction = 0.0;
    r.explanation = "all Y paths exploded before t = " + format_double(r.time);
    return r;
  }
  DominanceReport r = dominance_check(z, WeightedSampleSet::unweighted(y, knot), settings);
  r.knot = knot;
  r.time = y.grid().time(knot);
  r.n_y_total = y.n_paths();
  r.surviving_fraction = static_cast<double>(alive) / static_cast<double>(y.n_paths());
  return r;
}

}  // namespace sdecmp
