#include "common.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/integrate/integrate.hpp"
#include "sdecmp/zdual/duality.hpp"

namespace sdecmp {

using namespace cli;

namespace {

constexpr std::uint64_t kStrongStream = 0x57a9;
constexpr std::uint64_t kDominanceSeed = 0xd5ee;

}  // namespace

int cmd_compare(const std::filesystem::path& config, const RunOptions& options, std::ostream& out) {
  Run run = open_run("compare", config, options);
  const auto& cfg = run.cfg;
  const auto& cs = cfg.compare;
  const DriftFn drift = build_drift(cfg.drift);
  Json report;
  report["drift"] = cfg.drift.describe();
  report["assumptions"] = {{"filtration_equal", cs.filtration_equal}};
  if (!cs.filtration_equal) out << "note: filtration equality not assumed; Z is reported as a law, not a solution\n";

  const Verdict novikov = run_novikov(run, drift, out);
  report["novikov"] = to_string(novikov);
  auto stop = [&](int code, const std::string& reason) {
    report["stopped"] = reason;
    run.writer.write_report("compare.json", report);
    run.writer.finish(code);
    out << reason << "\n";
    return code;
  };
  if (novikov == Verdict::fail) return stop(kExitNovikov, "Novikov-type condition failed; comparison not run");
  if (novikov == Verdict::warn && !options.allow_warn) {
    return stop(kExitNovikov, "Novikov verdict is warn; rerun with --allow-warn to proceed");
  }

  const auto env = envelope_drift(cfg.drift, cfg.box, cfg.resolution, cfg.x0);
  write_envelope(run, drift, env);
  report["envelope"] = {{"passthrough", env.passthrough}, {"resolution", env.resolution}};
  const auto qm = is_quasi_monotone(env.drift, cfg.box, cs.quasi_monotone_probes, cs.quasi_monotone_tol,
                                    cfg.seed, run.workers);
  report["quasi_monotone"] = to_json(qm);
  if (!qm.pass) {
    const auto& w = *qm.witness;
    out << "quasi-monotone check failed on coordinate " << w.coordinate << ": f(x) = " << format_double(w.fx)
        << " > f(y) = " << format_double(w.fy) << "\n";
    return stop(kExitHypothesis, "envelope drift is not quasi-monotone; comparison hypothesis unmet");
  }

  const std::size_t n = cfg.x0.size();
  const DualityBatch batch(drift, cfg.x0,
                           sample_increments(cfg.grid, cfg.n_paths, n, cfg.seed, cfg.chunk_size, run.workers),
                           cs.ess_floor, run.workers);
  report["weights"] = to_json(batch.weights().diagnostics());
  const auto strong_inc = sample_increments(cfg.grid, cfg.n_paths, n, derive_seed(cfg.seed, kStrongStream),
                                            cfg.chunk_size, run.workers);
  const auto coupled = coupled_solve({drift, env.drift}, cfg.x0, strong_inc, cs.thresholds, run.workers);

  std::vector<double> times = cs.times;
  if (times.empty()) times = {cfg.grid.horizon() / 2, cfg.grid.horizon()};
  Json dominance = Json::array();
  bool violated = false, equality = true;
  for (double t : times) {
    const std::size_t knot = cfg.grid.knot_at(t);
    DominanceSettings ds;
    ds.tolerance = cs.tolerance;
    ds.n_bootstrap = cs.bootstrap;
    ds.seed = derive_seed(cfg.seed, kDominanceSeed + knot);
    ds.ess_floor = cs.ess_floor;
    ds.workers = run.workers;
    const auto r = dominance_check(weak_law_samples(batch, knot), coupled[1].paths, knot, ds);
    run.writer.write_csv("dominance_k" + std::to_string(knot) + ".csv", r.to_csv());
    dominance.push_back(to_json(r));
    violated = violated || r.verdict == DominanceVerdict::violated;
    equality = equality && r.equality;
    out << "t = " << format_double(r.time) << ": " << to_string(r.verdict) << (r.equality ? " (equality)" : "")
        << ", tolerance " << format_double(r.effective_tolerance) << ", ESS " << format_double(r.ess_z) << "\n";
    if (r.explanation) out << "  " << *r.explanation << "\n";
  }
  report["dominance"] = dominance;

  const auto pw = pathwise_compare(coupled[0].paths, coupled[1].paths, coupled[1].explosion, cs.slack);
  run.writer.write_csv("pathwise.csv", pw.to_csv(cfg.grid));
  report["pathwise"] = to_json(pw);
  run.writer.write_csv("paths_b.csv", path_quantiles(coupled[0].paths));
  run.writer.write_csv("paths_bhat.csv", path_quantiles(coupled[1].paths));
  run.writer.write_csv("explosion_bhat.csv", explosion_table(coupled[1].explosion));
  report["explosion_bhat"] = to_json(coupled[1].explosion);
  out << "pathwise: " << pw.total_violations() << " violations beyond slack " << format_double(cs.slack) << "\n";

  const bool failed = violated || pw.total_violations() > 0;
  report["equality"] = equality;
  report["pass"] = !failed;
  run.writer.write_report("compare.json", report);
  const int code = failed ? kExitProperty : kExitPass;
  run.writer.finish(code);
  return code;
}

}  // namespace sdecmp
