#include <algorithm>
#include <cmath>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/girsanov/girsanov.hpp"

namespace sdecmp {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::warn: return "warn";
    case Verdict::fail: return "fail";
  }
  return "unknown";
}

MeasureWeights::MeasureWeights(TimeGrid grid, std::size_t n_paths, std::vector<double> log_series,
                               std::vector<std::uint8_t> excluded, double ess_floor)
    : grid_(grid), n_paths_(n_paths), log_(std::move(log_series)), excluded_(std::move(excluded)) {
  if (log_.size() != n_paths_ * grid_.n_knots() || excluded_.size() != n_paths_) {
    throw InputError("MeasureWeights: storage does not match shape");
  }
  diagnose(ess_floor);
}

double MeasureWeights::weight(std::size_t p) const {
  return excluded(p) ? 0.0 : std::exp(terminal_log_weight(p));
}

double MeasureWeights::weight_at(std::size_t p, std::size_t k) const {
  return excluded(p) ? 0.0 : std::exp(log_weight(p, k));
}

std::vector<double> MeasureWeights::terminal_weights() const {
  std::vector<double> w(n_paths_);
  for (std::size_t p = 0; p < n_paths_; ++p) w[p] = weight(p);
  return w;
}

MeasureWeights MeasureWeights::perturbed(double delta) const {
  std::vector<double> log = log_;
  for (std::size_t p = 0; p < n_paths_; ++p) log[p * grid_.n_knots() + grid_.n_steps()] += delta;
  MeasureWeights out(grid_, n_paths_, std::move(log), excluded_);
  out.diag_.warning = diag_.warning;
  return out;
}

void MeasureWeights::diagnose(double ess_floor) {
  std::vector<double> used;
  used.reserve(n_paths_);
  for (std::size_t p = 0; p < n_paths_; ++p) {
    if (!excluded(p)) used.push_back(weight(p));
  }
  diag_.n_used = used.size();
  diag_.n_excluded = n_paths_ - used.size();
  if (used.empty()) {
    diag_.warning = "all paths excluded";
    return;
  }
  const MeanSe m = mean_se(used);
  diag_.mean_weight = m.mean;
  diag_.mean_weight_se = m.se;
  const double total = compensated_sum(used);
  diag_.max_share = total > 0.0 ? *std::max_element(used.begin(), used.end()) / total : 1.0;
  diag_.ess = effective_sample_size(used);
  if (diag_.ess < ess_floor) {
    diag_.warning = "effective sample size " + std::to_string(diag_.ess) + " below floor " +
                    std::to_string(ess_floor);
  }
}

namespace {

void check_shapes(const PathBatch& paths, const IncrementBatch& inc) {
  if (paths.n_paths() != inc.n_paths() || paths.dim() != inc.dim() || !(paths.grid() == inc.grid())) {
    throw InputError("paths and increments have different shapes");
  }
}

template <class StepFn>
MeasureWeights accumulate_log(const PathBatch& paths, std::size_t workers, double ess_floor,
                              StepFn&& step) {
  const TimeGrid& grid = paths.grid();
  const std::size_t knots = grid.n_knots();
  const std::size_t dim = paths.dim();
  std::vector<double> log(checked_storage(paths.n_paths(), knots));
  std::vector<std::uint8_t> excluded(paths.n_paths(), 0);
  for (std::size_t p = 0; p < paths.n_paths(); ++p) excluded[p] = paths.included(p) ? 0 : 1;

  for_each_chunk(paths.n_paths(), kDefaultChunkSize, workers,
                 [&](std::size_t begin, std::size_t end, std::size_t) {
                   std::vector<double> gamma(dim), db(dim);
                   for (std::size_t p = begin; p < end; ++p) {
                     double* l = log.data() + p * knots;
                     l[0] = 0.0;
                     std::size_t k = 0;
                     for (; k < grid.n_steps() && !excluded[p]; ++k) {
                       step(p, k, std::span<double>(gamma), std::span<double>(db));
                       double ito = 0.0;
                       double sq = 0.0;
                       for (std::size_t i = 0; i < dim; ++i) {
                         ito += gamma[i] * db[i];
                         sq += gamma[i] * gamma[i];
                       }
                       const double next = l[k] + ito - 0.5 * sq * grid.dt();
                       if (!std::isfinite(next)) {
                         excluded[p] = 1;
                         break;
                       }
                       l[k + 1] = next;
                     }
                     for (std::size_t j = k + 1; j < knots; ++j) l[j] = l[k];
                   }
                 });
  return MeasureWeights(grid, paths.n_paths(), std::move(log), std::move(excluded), ess_floor);
}

std::vector<double> tabulate(const TestFunction& f, const TimeGrid& grid, std::size_t dim) {
  if (f.dim() != dim) throw InputError("test function dimension does not match paths");
  std::vector<double> table(grid.n_knots() * dim);
  for (std::size_t k = 0; k < grid.n_knots(); ++k) {
    f.evaluate(grid.time(k), std::span<double>(table.data() + k * dim, dim));
  }
  return table;
}

MeasureWeights exponential_of(const PathBatch& paths, const Integrand& gamma,
                              const IncrementBatch& inc, std::size_t workers, double ess_floor) {
  check_shapes(paths, inc);
  return accumulate_log(paths, workers, ess_floor,
                        [&](std::size_t p, std::size_t k, std::span<double> g, std::span<double> db) {
                          gamma(k, paths.point(p, k), g);
                          const auto step = inc.step(p, k);
                          std::copy(step.begin(), step.end(), db.begin());
                        });
}

Integrand drift_integrand(const PathBatch& paths, const DriftFn& drift) {
  if (drift.dim() != paths.dim()) throw InputError("drift dimension does not match paths");
  return [&drift](std::size_t, std::span<const double> x, std::span<double> out) { drift(x, out); };
}

}  // namespace

MeasureWeights stochastic_exponential(const PathBatch& paths, const Integrand& gamma,
                                      const IncrementBatch& inc, std::size_t workers) {
  return exponential_of(paths, gamma, inc, workers, 0.0);
}

MeasureWeights stochastic_exponential(const PathBatch& paths, const DriftFn& drift,
                                      const IncrementBatch& inc, std::size_t workers) {
  return exponential_of(paths, drift_integrand(paths, drift), inc, workers, 0.0);
}

MeasureWeights stochastic_exponential(const PathBatch& paths, const TestFunction& f,
                                      const IncrementBatch& inc, std::size_t workers) {
  const std::size_t dim = paths.dim();
  const std::vector<double> table = tabulate(f, paths.grid(), dim);
  return stochastic_exponential(
      paths,
      [&](std::size_t k, std::span<const double>, std::span<double> out) {
        std::copy_n(table.begin() + static_cast<std::ptrdiff_t>(k * dim), dim, out.begin());
      },
      inc, workers);
}

MeasureWeights stochastic_exponential_along(const PathBatch& paths, const TestFunction& f,
                                            std::size_t workers) {
  const std::size_t dim = paths.dim();
  const std::vector<double> table = tabulate(f, paths.grid(), dim);
  return accumulate_log(paths, workers, 0.0, [&](std::size_t p, std::size_t k, std::span<double> g,
                                                 std::span<double> db) {
    std::copy_n(table.begin() + static_cast<std::ptrdiff_t>(k * dim), dim, g.begin());
    for (std::size_t i = 0; i < dim; ++i) db[i] = paths.at(p, k + 1, i) - paths.at(p, k, i);
  });
}

PathBatch shift_paths(const PathBatch& paths, const DriftFn& drift, std::size_t workers) {
  if (drift.dim() != paths.dim()) throw InputError("drift dimension does not match paths");
  const TimeGrid& grid = paths.grid();
  const std::size_t knots = grid.n_knots();
  const std::size_t dim = paths.dim();
  std::vector<double> values(checked_storage(paths.n_paths(), knots * dim));
  std::vector<PathState> states(paths.states().begin(), paths.states().end());

  for_each_chunk(paths.n_paths(), kDefaultChunkSize, workers,
                 [&](std::size_t begin, std::size_t end, std::size_t) {
                   std::vector<double> b(dim), integral(dim);
                   for (std::size_t p = begin; p < end; ++p) {
                     double* out = values.data() + p * knots * dim;
                     std::fill(integral.begin(), integral.end(), 0.0);
                     std::size_t k = 0;
                     for (; k < knots; ++k) {
                       const auto x = paths.point(p, k);
                       for (std::size_t i = 0; i < dim; ++i) out[k * dim + i] = x[i] - integral[i];
                       if (k + 1 == knots || states[p].status == PathStatus::excluded) break;
                       drift(x, b);
                       if (!std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); })) {
                         states[p] = {PathStatus::excluded, k};
                         break;
                       }
                       for (std::size_t i = 0; i < dim; ++i) integral[i] += b[i] * grid.dt();
                     }
                     for (std::size_t j = k + 1; j < knots; ++j) {
                       std::copy_n(out + k * dim, dim, out + j * dim);
                     }
                   }
                 });
  return PathBatch(grid, paths.n_paths(), dim,
                   std::vector<double>(paths.origin().begin(), paths.origin().end()),
                   std::move(values), std::move(states));
}

MeasureWeights girsanov_weights(const DriftFn& drift, const PathBatch& paths,
                                const IncrementBatch& inc, double ess_floor, std::size_t workers) {
  return exponential_of(paths, drift_integrand(paths, drift), inc, workers, ess_floor);
}

}  // namespace sdecmp
