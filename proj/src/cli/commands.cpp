#include <cmath>

#include "common.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/integrate/integrate.hpp"
#include "sdecmp/zdual/duality.hpp"

namespace sdecmp {

using namespace cli;

int cmd_novikov(const std::filesystem::path& config, const RunOptions& options, std::ostream& out) {
  Run run = open_run("novikov", config, options);
  const Verdict v = run_novikov(run, build_drift(run.cfg.drift), out);
  const int code = v == Verdict::fail ? kExitNovikov : kExitPass;
  run.writer.finish(code);
  return code;
}

int cmd_simulate(const std::filesystem::path& config, const RunOptions& options, std::ostream& out) {
  Run run = open_run("simulate", config, options);
  const auto& cfg = run.cfg;
  const DriftFn drift = build_drift(cfg.drift);
  const std::size_t n = cfg.x0.size();
  auto inc = sample_increments(cfg.grid, cfg.n_paths, n, cfg.seed, cfg.chunk_size, run.workers);
  const auto euler = euler_maruyama(drift, cfg.x0, inc, cfg.compare.thresholds, run.workers);
  run.writer.write_csv("paths_euler.csv", path_quantiles(euler.paths));
  run.writer.write_csv("explosion.csv", explosion_table(euler.explosion));

  const DualityBatch batch(drift, cfg.x0, std::move(inc), cfg.compare.ess_floor, run.workers);
  CsvTable moments({"knot", "time", "coordinate", "z_mean", "z_se", "euler_mean", "euler_se"});
  const std::size_t m = cfg.grid.n_steps();
  for (std::size_t knot : {m / 4, m / 2, m}) {
    if (knot == 0) continue;
    const auto z = z_moment(weak_law_samples(batch, knot), 1, false, 200, cfg.seed);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> ys;
      for (std::size_t p = 0; p < euler.paths.n_paths(); ++p) {
        if (euler.paths.alive_at(p, knot)) ys.push_back(euler.paths.at(p, knot, i));
      }
      const MeanSe e = mean_se(ys);
      moments.add_row({static_cast<long long>(knot), cfg.grid.time(knot), static_cast<long long>(i),
                       z[i].estimate, z[i].se, e.mean, e.se});
    }
  }
  run.writer.write_csv("moments.csv", moments);

  const auto& diag = batch.weights().diagnostics();
  run.writer.write_report("simulate.json", {{"drift", cfg.drift.describe()},
                                            {"n_paths", cfg.n_paths},
                                            {"horizon", cfg.grid.horizon()},
                                            {"steps", cfg.grid.n_steps()},
                                            {"weights", to_json(diag)},
                                            {"explosion", to_json(euler.explosion)}});
  out << "simulated " << cfg.n_paths << " paths of " << cfg.drift.describe() << "; mean weight "
      << format_double(diag.mean_weight) << " (se " << format_double(diag.mean_weight_se) << "), ESS "
      << format_double(diag.ess) << "\n";
  if (diag.warning) out << "warning: " << *diag.warning << "\n";
  run.writer.finish(kExitPass);
  return kExitPass;
}

int cmd_envelope(const std::filesystem::path& config, const RunOptions& options, std::ostream& out) {
  Run run = open_run("envelope", config, options);
  const auto& cfg = run.cfg;
  const DriftFn drift = build_drift(cfg.drift);
  const auto env = envelope_drift(cfg.drift, cfg.box, cfg.resolution, cfg.x0);
  write_envelope(run, drift, env);
  const auto qm = is_quasi_monotone(env.drift, cfg.box, cfg.compare.quasi_monotone_probes,
                                    cfg.compare.quasi_monotone_tol, cfg.seed, run.workers);
  run.writer.write_report("envelope.json", {{"drift", cfg.drift.describe()},
                                            {"passthrough", env.passthrough},
                                            {"resolution", env.resolution},
                                            {"components", env.components.size()},
                                            {"quasi_monotone", to_json(qm)}});
  out << "envelope of " << cfg.drift.describe() << (env.passthrough ? " (unchanged: already convex)" : "")
      << "; quasi-monotone: " << (qm.pass ? "yes" : "no") << (qm.certified ? " (certified)" : "") << "\n";
  const int code = qm.pass ? kExitPass : kExitHypothesis;
  run.writer.finish(code);
  return code;
}

int cmd_scaling(const std::filesystem::path& config, const RunOptions& options, std::ostream& out) {
  Run run = open_run("scaling", config, options);
  const auto& cfg = run.cfg;
  const DriftFn drift = build_drift(cfg.drift);
  const auto inc = sample_increments(cfg.grid, cfg.n_paths, cfg.x0.size(), cfg.seed, cfg.chunk_size, run.workers);
  const auto fit = kolmogorov_scaling(drift, cfg.x0, inc, {cfg.scaling.anchor, cfg.scaling.lags, 200, cfg.seed, run.workers});
  run.writer.write_csv("scaling.csv", fit.to_csv());
  const bool ok = fit.slope >= 1.3 && fit.slope <= 1.7;
  run.writer.write_report("scaling.json", {{"drift", cfg.drift.describe()},
                                           {"slope", fit.slope},
                                           {"intercept", fit.intercept},
                                           {"ci95", {fit.ci_lower, fit.ci_upper}},
                                           {"slope_se", fit.slope_se},
                                           {"n_paths", fit.n_paths},
                                           {"expected_range", {1.3, 1.7}},
                                           {"pass", ok}});
  out << "moment scaling slope " << format_double(fit.slope) << " [" << format_double(fit.ci_lower) << ", "
      << format_double(fit.ci_upper) << "]" << (ok ? "" : " outside [1.3, 1.7]") << "\n";
  const int code = ok ? kExitPass : kExitProperty;
  run.writer.finish(code);
  return code;
}

}  // namespace sdecmp
