#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/integrate/integrate.hpp"
#include "sdecmp/linear_bound/linear_bound.hpp"

namespace sdecmp {

using namespace cli;

namespace {

constexpr std::uint64_t kHypothesisTag = 0x11b0;

double median_max_error(const PathBatch& a, const PathBatch& b) {
  std::vector<double> worst;
  for (std::size_t p = 0; p < a.n_paths(); ++p) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.grid().n_knots(); ++k) {
      if (!a.alive_at(p, k)) break;
      for (std::size_t i = 0; i < a.dim(); ++i) e = std::max(e, std::abs(a.at(p, k, i) - b.at(p, k, i)));
    }
    worst.push_back(e);
  }
  return quantile(std::move(worst), 0.5);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

int cmd_linear_bound(const std::filesystem::path& config, const RunOptions& options, std::ostream& out) {
  Run run = open_run("linear-bound", config, options);
  const auto& cfg = run.cfg;
  const bool separate = cfg.linear_bound.has_value();
  const auto* own = std::get_if<LinearDrift>(&cfg.drift.kind);
  if (!separate && !own) throw ConfigError("linear_bound: needs a linear drift or a 'linear_bound' section");
  const LinearDrift lin = separate ? *cfg.linear_bound : *own;
  const auto params = LinearDriftParams::from(lin);
  const Eigen::MatrixXd& A = params.matrix;
  const std::size_t n = params.dim();
  Json report;
  report["drift"] = cfg.drift.describe();
  report["off_diagonal_nonneg"] = params.off_diagonal_nonneg;
  auto finish = [&](int code) {
    report["exit_code"] = code;
    run.writer.write_report("linear_bound.json", report);
    run.writer.finish(code);
    return code;
  };
  if (!params.off_diagonal_nonneg) {
    out << "linear bound matrix has a negative off-diagonal entry; comparison hypothesis unmet\n";
    return finish(kExitHypothesis);
  }

  const TimeGrid& grid = cfg.grid;
  const auto series = fundamental_matrix(A, grid);
  const std::size_t m = grid.n_steps();
  const std::size_t stride = std::max<std::size_t>(1, m / 16);
  double semigroup = 0.0;
  for (std::size_t k = 0; k <= m; k += stride)
    for (std::size_t j = 0; k + j <= m; j += stride) {
      const Eigen::MatrixXd& whole = series.phi[k + j];
      semigroup = std::max(semigroup, max_abs(whole - series.phi[k] * series.phi[j]) / std::max(1.0, max_abs(whole)));
    }
  const double ode = matrix_ode_check(A, grid);
  Json nilpotent;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  for (std::size_t k = 0; k < n; ++k) power = power * A;
  if (power.isZero(0.0)) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    for (std::size_t k = 0; k < n; ++k) {
      sum += term;
      term = term * A * grid.horizon() / static_cast<double>(k + 1);
    }
    nilpotent = max_abs(series.phi.back() - sum);
  }
  CsvTable phi_csv({"knot", "time", "row", "col", "phi", "phi_inv"});
  for (std::size_t k = 0; k <= m; ++k)
    for (Eigen::Index r = 0; r < A.rows(); ++r)
      for (Eigen::Index c = 0; c < A.cols(); ++c) {
        phi_csv.add_row({static_cast<long long>(k), grid.time(k), static_cast<long long>(r), static_cast<long long>(c),
                         series.phi[k](r, c), series.phi_inv[k](r, c)});
      }
  run.writer.write_csv("fundamental_matrix.csv", phi_csv);

  const DriftFn lin_fn = build_drift({lin});
  const auto inc = sample_increments(grid, cfg.n_paths, n, cfg.seed, cfg.chunk_size, run.workers);
  const auto closed = linear_solution_path(params, cfg.x0, inc, run.workers);
  const auto euler = euler_maruyama(lin_fn, cfg.x0, inc, cfg.compare.thresholds, run.workers);
  CsvTable errors({"steps", "dt", "median_max_error"});
  const double err = median_max_error(euler.paths, closed);
  errors.add_row({static_cast<long long>(m), grid.dt(), err});
  Json ratio;
  // an exact scheme (A = 0) leaves only rounding error; no rate to measure
  const bool exact_scheme = err <= 1e-12 * (1.0 + max_abs(series.phi.back()));
  report["exact_scheme"] = exact_scheme;
  if (m % 2 == 0 && !exact_scheme) {
    const auto coarse = inc.coarsened(2);
    const double err2 = median_max_error(euler_maruyama(lin_fn, cfg.x0, coarse, cfg.compare.thresholds, run.workers).paths,
                                         linear_solution_path(params, cfg.x0, coarse, run.workers));
    errors.add_row({static_cast<long long>(m / 2), coarse.grid().dt(), err2});
    ratio = err2 / err;
  }
  run.writer.write_csv("linear_errors.csv", errors);

  CsvTable means({"knot", "time", "coordinate", "closed_form_mean", "path_mean", "path_se"});
  for (std::size_t k = 0; k <= m; k += stride) {
    const Eigen::VectorXd mu = linear_mean(params, cfg.x0, grid.time(k));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> xs(closed.n_paths());
      for (std::size_t p = 0; p < closed.n_paths(); ++p) xs[p] = closed.at(p, k, i);
      const MeanSe ms = mean_se(xs);
      means.add_row({static_cast<long long>(k), grid.time(k), static_cast<long long>(i),
                     mu(static_cast<Eigen::Index>(i)), ms.mean, ms.se});
    }
  }
  run.writer.write_csv("linear_mean.csv", means);

  const bool phi_ok = semigroup <= 1e-9 && ode <= 1e-8 && (nilpotent.is_null() || nilpotent.get<double>() <= 1e-12);
  const bool ratio_ok = ratio.is_null() || (ratio.get<double>() >= 1.7 && ratio.get<double>() <= 2.3);
  report["phi"] = {{"semigroup_deviation", semigroup}, {"ode_deviation", ode}, {"nilpotent_deviation", nilpotent}};
  report["euler_vs_closed_form"] = {{"median_max_error", err}, {"dt", grid.dt()}, {"refinement_ratio", ratio}};
  out << "Phi: semigroup " << format_double(semigroup) << ", ODE " << format_double(ode) << "; Euler error "
      << format_double(err) << (ratio.is_null() ? std::string() : ", refinement ratio " + format_double(ratio.get<double>()))
      << "\n";

  bool compared_ok = true;
  if (separate) {
    // hypothesis b(x) >= A x + offset, componentwise, on random points of the box
    const DriftFn drift = build_drift(cfg.drift);
    Philox4x32 rng(derive_seed(cfg.seed, kHypothesisTag), 0);
    std::vector<double> x(n);
    Json witness;
    for (std::size_t probe = 0; probe < cfg.compare.quasi_monotone_probes && witness.is_null(); ++probe) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto [lo, hi] = cfg.box.bounds[i];
        x[i] = lo + (hi - lo) * rng.uniform01();
      }
      const auto b = drift(x);
      const auto l = lin_fn(x);
      for (std::size_t i = 0; i < n; ++i) {
        if (b[i] < l[i] - cfg.compare.quasi_monotone_tol) {
          witness = {{"x", x}, {"coordinate", i}, {"b", b[i]}, {"bound", l[i]}};
          break;
        }
      }
    }
    report["lower_bound_witness"] = witness;
    if (!witness.is_null()) {
      out << "drift falls below the linear bound at a sampled point; comparison hypothesis unmet\n";
      return finish(kExitHypothesis);
    }
    const auto eb = euler_maruyama(drift, cfg.x0, inc, cfg.compare.thresholds, run.workers);
    const auto pw = pathwise_compare(eb.paths, euler.paths, eb.explosion, cfg.compare.slack);
    run.writer.write_csv("pathwise.csv", pw.to_csv(grid));
    report["pathwise"] = to_json(pw);
    compared_ok = pw.total_violations() == 0;
    out << "pathwise against the linear solution: " << pw.total_violations() << " violations\n";
  }
  report["pass"] = phi_ok && ratio_ok && compared_ok;
  return finish(phi_ok && ratio_ok && compared_ok ? kExitPass : kExitProperty);
}

}  // namespace sdecmp
