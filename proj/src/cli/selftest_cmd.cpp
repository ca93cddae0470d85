#include <cmath>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/integrate/integrate.hpp"
#include "sdecmp/zdual/duality.hpp"

namespace sdecmp {

using namespace cli;

namespace {

constexpr const char* kDefaultSelftestConfig = R"(drift: {kind: tanh, dim: 1}
x0: [0.3]
grid: {horizon: 1.0, steps: 64}
sampling: {paths: 10000, seed: 1}
output: selftest-out
test_functions:
  - {kind: constant, value: [0.5]}
  - {kind: fourier, period: 1.0, mean: [-0.3], cos: [[0.4]], sin: [[0.2]]}
  - {kind: piecewise_constant, breakpoints: [0.5], values: [[0.8], [-0.4]]}
)";

constexpr double kBand = 5.0;

struct Identity {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string note;
};

Identity within_band(std::string name, double value, double se) {
  return {std::move(name), value, se, kBand * se, std::abs(value) <= kBand * se, ""};
}

Identity exact(std::string name, double deviation, double bound) {
  return {std::move(name), deviation, 0.0, bound, deviation <= bound, ""};
}

std::vector<TestFunction> default_tests(std::size_t n) {
  std::vector<TestFunction> out;
  out.emplace_back(ConstantTest{std::vector<double>(n, 0.5)});
  FourierTest f;
  f.mean.assign(n, -0.3);
  f.cos_terms = {std::vector<double>(n, 0.4)};
  f.sin_terms = {std::vector<double>(n, 0.2)};
  out.emplace_back(f);
  return out;
}

std::vector<Identity> battery(const DualityBatch& batch, const std::vector<TestFunction>& tests,
                              std::size_t workers) {
  std::vector<Identity> out;
  const TimeGrid& grid = batch.grid();
  const double T = grid.horizon();
  const std::size_t n = batch.dim();
  const auto& diag = batch.weights().diagnostics();
  out.push_back(within_band("normalization", diag.mean_weight - 1.0, diag.mean_weight_se));

  std::vector<PathFunctional> Ys;
  for (const auto& f : tests) Ys.push_back(PathFunctional::exponential(f));
  const auto one = PathFunctional::constant(1.0);
  for (std::size_t j = 0; j < Ys.size(); ++j) {
    const auto r = left_inverse_residual(batch, one, Ys[j]);
    out.push_back(within_band("z_of_one[" + std::to_string(j) + "]", r.estimate, r.se));
  }

  const std::vector<std::pair<PathFunctional, PathFunctional>> pairs{
      {PathFunctional::cylinder(ScalarMap::sine(), grid.time(grid.n_steps() / 2), 0), Ys.front()},
      {PathFunctional::cylinder(ScalarMap::hyperbolic_tangent(), T, n - 1), Ys.back()},
      {PathFunctional::cylinder(ScalarMap::cosine(), grid.time(grid.n_steps() / 4), 0),
       PathFunctional::cylinder(ScalarMap::logistic(), T, 0)}};
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto r = left_inverse_residual(batch, pairs[j].first, pairs[j].second);
    out.push_back(within_band("left_inverse[" + std::to_string(j) + "]", r.estimate, r.se));
  }

  const auto square = PathFunctional::cylinder(ScalarMap::square(), T, 0);
  std::size_t negative = 0;
  for (const auto& Y : Ys)
    for (double t : pairing_terms(batch, square, Y)) negative += t < 0.0;
  out.push_back(exact("positivity", static_cast<double>(negative), 0.0));

  const auto X = PathFunctional::coordinate(T, 0);
  {
    const auto a = pairing_terms(batch, X, Ys.front());
    const auto b = pairing_terms(batch, X, Ys.back());
    const auto c = pairing_terms(batch, X, Ys.front().scaled(2.0) + Ys.back().scaled(-0.5));
    double dev = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
      dev = std::max(dev, std::abs(c[p] - (2.0 * a[p] - 0.5 * b[p])) / (1.0 + std::abs(c[p])));
    }
    out.push_back(exact("linearity", dev, 1e-12));
  }

  {
    const DriftFn& drift = batch.drift();
    const TestFunction& f = tests.back();
    const Integrand sum = [&](std::size_t k, std::span<const double> x, std::span<double> o) {
      drift(x, o);
      const auto fv = f(grid.time(k));
      for (std::size_t i = 0; i < o.size(); ++i) o[i] += fv[i];
    };
    const auto joint = stochastic_exponential(batch.paths(), sum, batch.increments(), workers);
    const auto eb = stochastic_exponential(batch.paths(), drift, batch.increments(), workers);
    const auto ef = stochastic_exponential_along(batch.shifted(), f, workers);
    double dev = 0.0;
    for (std::size_t p = 0; p < batch.n_paths(); ++p) {
      if (!batch.included(p)) continue;
      const double lhs = joint.terminal_log_weight(p);
      dev = std::max(dev, std::abs(lhs - eb.terminal_log_weight(p) - ef.terminal_log_weight(p)) / (1.0 + std::abs(lhs)));
    }
    out.push_back(exact("factorization", dev, 1e-10));
  }

  if (!batch.drift().traits().lipschitz) {
    for (const char* name : {"jensen", "duality"}) {
      Identity skipped{name, 0.0, 0.0, 0.0, true, "skipped: drift is not globally Lipschitz"};
      out.push_back(skipped);
    }
    return out;
  }
  const std::vector<PathFunctional> nonneg{one, Ys.front(), PathFunctional::cylinder(ScalarMap::logistic(), T, 0)};
  for (const auto& phi : {ScalarMap::square(), ScalarMap::absolute()}) {
    const auto r = jensen_gap(batch, phi, X, nonneg, batch.increments(), workers);
    for (std::size_t j = 0; j < r.cases.size(); ++j) {
      const auto& c = r.cases[j];
      out.push_back({"jensen[" + phi.name() + "," + std::to_string(j) + "]", c.gap, c.se, -kBand * c.se, c.holds, ""});
    }
  }
  const auto euler = euler_maruyama(batch.drift(), batch.origin(), batch.increments(), kDefaultThresholds, workers);
  for (std::size_t j = 0; j < Ys.size(); ++j) {
    const auto weak = pairing_estimate(batch, grid.n_steps(), Ys[j]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto strong = strong_expectation(euler.paths, batch.paths(), PathFunctional::coordinate(T, i), Ys[j]);
      const auto& w = weak[i].self_normalized;
      out.push_back(within_band("duality[" + std::to_string(j) + "," + std::to_string(i) + "]",
                                w.estimate - strong.estimate, std::hypot(w.se, strong.se)));
    }
  }
  return out;
}

}  // namespace

int cmd_selftest(const std::optional<std::filesystem::path>& config, const RunOptions& options, std::ostream& out) {
  std::string text = kDefaultSelftestConfig;
  std::string origin = "(built-in)";
  if (config) {
    std::ifstream in(*config, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + config->string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    origin = config->string();
  }
  Run run = open_run("selftest", text, origin, options);
  const auto& cfg = run.cfg;
  const DriftFn drift = build_drift(cfg.drift);
  DualityBatch batch(drift, cfg.x0,
                     sample_increments(cfg.grid, cfg.n_paths, cfg.x0.size(), cfg.seed, cfg.chunk_size, run.workers),
                     cfg.compare.ess_floor, run.workers);
  if (options.inject_fault == "weights") {
    batch.set_weights(batch.weights().perturbed(0.5));
  } else if (!options.inject_fault.empty()) {
    throw ConfigError("unknown fault '" + options.inject_fault + "' (expected: weights)");
  }
  const auto tests = cfg.test_functions.empty() ? default_tests(cfg.x0.size()) : cfg.test_functions;
  const auto ids = battery(batch, tests, run.workers);

  CsvTable csv({"identity", "value", "se", "bound", "pass"});
  Json list = Json::array();
  std::vector<std::string> failed;
  for (const auto& id : ids) {
    csv.add_row({id.name, id.value, id.se, id.bound, static_cast<long long>(id.pass)});
    list.push_back({{"identity", id.name}, {"value", number(id.value)}, {"se", number(id.se)},
                    {"bound", number(id.bound)}, {"pass", id.pass}, {"note", id.note}});
    out << (id.pass ? "PASS " : "FAIL ") << id.name << " value=" << format_double(id.value)
        << " se=" << format_double(id.se) << (id.note.empty() ? "" : " (" + id.note + ")") << "\n";
    if (!id.pass) failed.push_back(id.name);
  }
  run.writer.write_csv("selftest.csv", csv);
  run.writer.write_report("selftest.json", {{"drift", cfg.drift.describe()},
                                            {"n_paths", cfg.n_paths},
                                            {"fault", options.inject_fault},
                                            {"identities", list},
                                            {"failed", failed}});
  if (!failed.empty()) {
    out << "failed identities:";
    for (const auto& f : failed) out << " " << f;
    out << "\n";
  }
  const int code = failed.empty() ? kExitPass : kExitProperty;
  run.writer.finish(code);
  return code;
}

}  // namespace sdecmp
