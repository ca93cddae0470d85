#include "common.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/integrate/integrate.hpp"

namespace sdecmp::cli {

namespace {

std::map<std::string, std::string> module_versions() {
  std::map<std::string, std::string> out;
  for (const char* m : {"core", "girsanov", "zdual", "drift_analysis", "integrate", "linear_bound", "compare", "cli"}) {
    out[m] = std::string(kVersion);
  }
  return out;
}

Json point(std::span<const double> x) {
  Json j = Json::array();
  for (double v : x) j.push_back(number(v));
  return j;
}

}  // namespace

Run open_run(const std::string& command, const std::string& config_text, const std::string& config_path,
             const RunOptions& options) {
  ExperimentConfig cfg = parse_config(config_text);
  if (options.seed) cfg.seed = *options.seed;
  if (options.output) cfg.output_dir = *options.output;
  if (options.workers) cfg.workers = *options.workers;

  RunManifest m;
  m.command = command;
  m.config_path = config_path;
  m.seed = cfg.seed;
  m.module_versions = module_versions();
  m.config_hash = sha256_hex(command + "\n" + config_text + "\nseed=" + std::to_string(cfg.seed));
  const std::size_t workers = resolve_workers(cfg.workers);
  const std::filesystem::path root = cfg.output_dir;
  return Run{std::move(cfg), workers, RunWriter(root, std::move(m))};
}

Run open_run(const std::string& command, const std::filesystem::path& config, const RunOptions& options) {
  std::ifstream in(config, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + config.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return open_run(command, text.str(), config.string(), options);
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(); }

Json to_json(const EstimateWithCI& e) {
  return {{"estimate", number(e.estimate)}, {"se", number(e.se)}, {"lower", number(e.lower())},
          {"upper", number(e.upper())}, {"n_effective", number(e.n_effective)}};
}

Json to_json(const NovikovEstimate& e) {
  Json j;
  j["x"] = point(e.x);
  j["estimate"] = number(e.estimate);
  j["overflow"] = std::isinf(e.estimate);
  j["se"] = number(e.se);
  j["ci95"] = {number(e.estimate - 1.96 * e.se), number(e.estimate + 1.96 * e.se)};
  j["log_estimate"] = number(e.log_estimate);
  j["n_paths"] = e.n_paths;
  j["max_share"] = number(e.max_share);
  j["tail_index"] = e.tail_index ? number(*e.tail_index) : Json();
  j["max_exponent"] = number(e.max_exponent);
  j["overflow_quantile"] = e.overflow_quantile ? number(*e.overflow_quantile) : Json();
  j["verdict"] = to_string(e.verdict);
  j["reasons"] = e.reasons;
  return j;
}

Json to_json(const WeightDiagnostics& d) {
  return {{"mean_weight", number(d.mean_weight)}, {"mean_weight_se", number(d.mean_weight_se)},
          {"max_share", number(d.max_share)},     {"ess", number(d.ess)},
          {"n_used", d.n_used},                   {"n_excluded", d.n_excluded},
          {"warning", d.warning ? Json(*d.warning) : Json()}};
}

Json to_json(const QuasiMonotoneReport& r) {
  Json j{{"pass", r.pass}, {"certified", r.certified}, {"n_probes", r.n_probes}, {"tolerance", r.tolerance}};
  if (r.witness) {
    j["witness"] = {{"x", point(r.witness->x)},
                    {"y", point(r.witness->y)},
                    {"coordinate", r.witness->coordinate},
                    {"f_x", number(r.witness->fx)},
                    {"f_y", number(r.witness->fy)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

Json to_json(const DominanceReport& r) {
  Json j;
  j["knot"] = r.knot;
  j["time"] = r.time;
  j["verdict"] = to_string(r.verdict);
  j["equality"] = r.equality;
  j["tolerance"] = r.tolerance;
  j["effective_tolerance"] = number(r.effective_tolerance);
  j["ess_z"] = number(r.ess_z);
  j["n_z"] = r.n_z;
  j["n_y"] = r.n_y;
  j["n_y_total"] = r.n_y_total;
  j["surviving_fraction"] = r.surviving_fraction;
  j["n_bootstrap"] = r.n_bootstrap;
  j["explanation"] = r.explanation ? Json(*r.explanation) : Json();
  Json cs = Json::array();
  for (const auto& c : r.coordinates) {
    cs.push_back({{"coordinate", c.coordinate},
                  {"verdict", to_string(c.verdict)},
                  {"equality", c.equality},
                  {"max_gap", number(c.max_gap)},
                  {"max_gap_ucb", number(c.max_ucb)},
                  {"max_gap_lcb", number(c.max_lcb)},
                  {"min_gap_lcb", number(c.min_lcb)}});
  }
  j["coordinates"] = cs;
  return j;
}

Json to_json(const PathwiseStats& s) {
  Json cs = Json::array();
  for (const auto& c : s.coordinates) {
    cs.push_back({{"coordinate", c.coordinate},
                  {"violations", c.n_violations},
                  {"max_violation", number(c.max_violation)},
                  {"min_gap", number(c.min_gap)}});
  }
  return {{"n_paths", s.n_paths},
          {"n_compared", s.n_compared},
          {"slack", s.slack},
          {"total_violations", s.total_violations()},
          {"coordinates", cs}};
}

Json to_json(const ExplosionInfo& e) {
  Json levels = Json::array();
  for (const auto& l : e.summaries) {
    levels.push_back({{"level", l.level},
                      {"n_crossed", l.n_crossed},
                      {"fraction", l.fraction},
                      {"tau_q10", l.tau_q10 ? number(*l.tau_q10) : Json()},
                      {"tau_median", l.tau_median ? number(*l.tau_median) : Json()},
                      {"tau_q90", l.tau_q90 ? number(*l.tau_q90) : Json()}});
  }
  return {{"levels", levels}, {"n_nonfinite", e.n_nonfinite}};
}

Verdict run_novikov(Run& run, const DriftFn& drift, std::ostream& out) {
  const auto& cfg = run.cfg;
  std::vector<std::vector<double>> points{cfg.x0};
  for (const auto& p : cfg.novikov.probe_points) {
    if (p.size() != cfg.x0.size()) throw ConfigError("novikov.probes: dimension does not match drift");
    points.push_back(p);
  }
  std::vector<std::string> header{"point"};
  for (std::size_t i = 0; i < cfg.x0.size(); ++i) header.push_back("x" + std::to_string(i));
  for (const char* h : {"estimate", "se", "log_estimate", "max_share", "tail_index", "max_exponent", "verdict"}) {
    header.emplace_back(h);
  }
  CsvTable csv(header);
  Json estimates = Json::array();
  Verdict worst = Verdict::pass;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const auto e = novikov_estimate(drift, points[j], cfg.grid, cfg.n_paths, cfg.seed, cfg.novikov,
                                    cfg.chunk_size, run.workers);
    worst = std::max(worst, e.verdict);
    std::vector<CsvTable::Cell> row{static_cast<long long>(j)};
    for (double v : points[j]) row.emplace_back(v);
    for (double v : {e.estimate, e.se, e.log_estimate, e.max_share,
                     e.tail_index.value_or(std::numeric_limits<double>::quiet_NaN()), e.max_exponent}) {
      row.emplace_back(v);
    }
    row.emplace_back(std::string(to_string(e.verdict)));
    csv.add_row(std::move(row));
    estimates.push_back(to_json(e));
    out << "novikov at point " << j << ": estimate " << format_double(e.estimate) << " (se "
        << format_double(e.se) << "), verdict " << to_string(e.verdict) << "\n";
    for (const auto& r : e.reasons) out << "  " << r << "\n";
  }
  run.writer.write_report("novikov.json", {{"verdict", to_string(worst)}, {"estimates", estimates}});
  run.writer.write_csv("novikov.csv", csv);
  return worst;
}

void write_envelope(Run& run, const DriftFn& drift, const EnvelopeDrift& env) {
  for (std::size_t i = 0; i < env.components.size(); ++i) {
    run.writer.write_csv("envelope_component" + std::to_string(i) + ".csv", env.components[i].to_csv());
  }
  const auto& cfg = run.cfg;
  CsvTable profile({"axis", "u", "coordinate", "b", "b_hat"});
  const std::size_t n = cfg.x0.size();
  const std::size_t m = std::min<std::size_t>(cfg.resolution, 1025);
  std::vector<double> x(cfg.x0);
  for (std::size_t axis = 0; axis < n; ++axis) {
    const auto [lo, hi] = cfg.box.bounds[axis];
    for (std::size_t k = 0; k < m; ++k) {
      x = cfg.x0;
      x[axis] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
      const auto b = drift(x);
      const auto bh = env.drift(x);
      for (std::size_t i = 0; i < n; ++i) {
        profile.add_row({static_cast<long long>(axis), x[axis], static_cast<long long>(i), b[i], bh[i]});
      }
    }
  }
  run.writer.write_csv("envelope_profile.csv", profile);
}

CsvTable path_quantiles(const PathBatch& paths) {
  const std::vector<double> probs{0.05, 0.25, 0.5, 0.75, 0.95};
  CsvTable t({"knot", "time", "coordinate", "q05", "q25", "q50", "q75", "q95", "alive_fraction"});
  std::vector<double> alive(paths.grid().n_knots(), 0.0);
  for (std::size_t p = 0; p < paths.n_paths(); ++p)
    for (std::size_t k = 0; k < alive.size(); ++k) alive[k] += paths.alive_at(p, k);
  for (std::size_t i = 0; i < paths.dim(); ++i) {
    const auto q = knot_quantiles(paths, i, probs);
    for (std::size_t k = 0; k < q.size(); ++k) {
      t.add_row({static_cast<long long>(k), paths.grid().time(k), static_cast<long long>(i), q[k][0], q[k][1],
                 q[k][2], q[k][3], q[k][4], alive[k] / static_cast<double>(paths.n_paths())});
    }
  }
  return t;
}

CsvTable explosion_table(const ExplosionInfo& e) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  CsvTable t({"level", "n_crossed", "fraction", "tau_q10", "tau_median", "tau_q90"});
  for (const auto& l : e.summaries) {
    t.add_row({l.level, static_cast<long long>(l.n_crossed), l.fraction, l.tau_q10.value_or(nan),
               l.tau_median.value_or(nan), l.tau_q90.value_or(nan)});
  }
  return t;
}

}  // namespace sdecmp::cli
