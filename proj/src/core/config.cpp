#include "sdecmp/core/config.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sdecmp/core/errors.hpp"

namespace sdecmp {

namespace {

YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& path) {
  const YAML::Node node = parent[key];
  if (!node) throw ConfigError("missing required key '" + path + "'");
  return node;
}

template <class T>
T as(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("key '" + path + "' has the wrong type");
  }
}

template <class T>
T get_or(const YAML::Node& parent, const std::string& key, const std::string& path, T fallback) {
  const YAML::Node node = parent[key];
  return node ? as<T>(node, path) : fallback;
}

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

Eigen::MatrixXd to_matrix(const Mat& rows, const std::string& path) {
  if (rows.empty()) throw ConfigError("key '" + path + "' must be a non-empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw ConfigError("key '" + path + "' has ragged rows");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

LinearDrift parse_linear(const YAML::Node& node, const std::string& prefix) {
  LinearDrift d;
  d.matrix = to_matrix(as<Mat>(require(node, "matrix", prefix + ".matrix"), prefix + ".matrix"),
                       prefix + ".matrix");
  const Vec offset = node["offset"] ? as<Vec>(node["offset"], prefix + ".offset")
                                    : Vec(static_cast<std::size_t>(d.matrix.rows()), 0.0);
  d.offset = Eigen::Map<const Eigen::VectorXd>(offset.data(), static_cast<Eigen::Index>(offset.size()));
  return d;
}

DriftSpec parse_drift(const YAML::Node& node) {
  const auto kind = as<std::string>(require(node, "kind", "drift.kind"), "drift.kind");
  DriftSpec spec;
  if (kind == "constant") {
    spec.kind = ConstantDrift{as<Vec>(require(node, "value", "drift.value"), "drift.value")};
  } else if (kind == "linear") {
    spec.kind = parse_linear(node, "drift");
  } else if (kind == "tanh" || kind == "sine" || kind == "shifted_sine") {
    BoundedDrift d;
    d.shape = kind == "tanh" ? BoundedShape::tanh
              : kind == "sine" ? BoundedShape::sine
                               : BoundedShape::shifted_sine;
    d.dim = get_or<std::size_t>(node, "dim", "drift.dim", 1);
    d.amplitude = get_or<double>(node, "amplitude", "drift.amplitude", 1.0);
    d.frequency = get_or<double>(node, "frequency", "drift.frequency", 1.0);
    d.shift = get_or<double>(node, "shift", "drift.shift", kind == "shifted_sine" ? 2.0 : 0.0);
    spec.kind = d;
  } else if (kind == "polynomial") {
    spec.kind = PolynomialDrift{
        as<Mat>(require(node, "coefficients", "drift.coefficients"), "drift.coefficients")};
  } else if (kind == "grid") {
    spec.kind = GridDrift{as<Mat>(require(node, "axes", "drift.axes"), "drift.axes"),
                          as<Vec>(require(node, "values", "drift.values"), "drift.values")};
  } else {
    throw ConfigError("drift.kind: unknown kind '" + kind +
                      "' (expected constant, linear, tanh, sine, shifted_sine, polynomial, grid)");
  }
  spec.validate();
  return spec;
}

TestFunction parse_test_function(const YAML::Node& node, const std::string& path) {
  const auto kind = as<std::string>(require(node, "kind", path + ".kind"), path + ".kind");
  if (kind == "constant") {
    return TestFunction(ConstantTest{as<Vec>(require(node, "value", path + ".value"), path + ".value")});
  }
  if (kind == "piecewise_constant") {
    return TestFunction(PiecewiseConstantTest{
        get_or<Vec>(node, "breakpoints", path + ".breakpoints", {}),
        as<Mat>(require(node, "values", path + ".values"), path + ".values")});
  }
  if (kind == "fourier") {
    FourierTest f;
    f.period = get_or<double>(node, "period", path + ".period", 1.0);
    f.mean = as<Vec>(require(node, "mean", path + ".mean"), path + ".mean");
    f.cos_terms = get_or<Mat>(node, "cos", path + ".cos", {});
    f.sin_terms = get_or<Mat>(node, "sin", path + ".sin", {});
    return TestFunction(f);
  }
  throw ConfigError(path + ".kind: unknown test function kind '" + kind + "'");
}

}  // namespace

bool Box::contains(std::span<const double> x) const {
  if (x.size() != bounds.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < bounds[i].first || x[i] > bounds[i].second) return false;
  }
  return true;
}

void ExperimentConfig::validate() const {
  drift.validate();
  const std::size_t n = drift.dim();
  if (x0.size() != n) throw ConfigError("x0: dimension does not match drift (" + std::to_string(n) + ")");
  if (n_paths == 0) throw ConfigError("sampling.paths: must be positive");
  if (chunk_size == 0) throw ConfigError("sampling.chunk_size: must be positive");
  if (box.dim() != n) throw ConfigError("envelope.box: dimension does not match drift");
  for (const auto& [lo, hi] : box.bounds) {
    if (!(lo < hi)) throw ConfigError("envelope.box: each axis needs lo < hi");
  }
  if (!box.contains(x0)) throw ConfigError("envelope.box: box does not contain x0");
  if (resolution < 2) throw ConfigError("envelope.resolution: must be at least 2");
  for (const auto& f : test_functions) {
    if (f.dim() != n) throw ConfigError("test_functions: dimension does not match drift");
  }
  if (linear_bound && linear_bound->matrix.rows() != static_cast<Eigen::Index>(n)) {
    throw ConfigError("linear_bound: dimension does not match drift");
  }
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config root must be a mapping");

  ExperimentConfig cfg;
  cfg.drift = parse_drift(require(root, "drift", "drift"));
  cfg.x0 = as<Vec>(require(root, "x0", "x0"), "x0");

  const YAML::Node grid = require(root, "grid", "grid");
  cfg.grid = TimeGrid(as<double>(require(grid, "horizon", "grid.horizon"), "grid.horizon"),
                      as<std::size_t>(require(grid, "steps", "grid.steps"), "grid.steps"));

  const YAML::Node sampling = require(root, "sampling", "sampling");
  cfg.n_paths = as<std::size_t>(require(sampling, "paths", "sampling.paths"), "sampling.paths");
  cfg.seed = as<std::uint64_t>(require(sampling, "seed", "sampling.seed"), "sampling.seed");
  cfg.chunk_size = get_or<std::size_t>(sampling, "chunk_size", "sampling.chunk_size", kDefaultChunkSize);
  cfg.workers = get_or<std::size_t>(sampling, "workers", "sampling.workers", 0);

  const std::size_t n = cfg.drift.dim();
  if (const YAML::Node env = root["envelope"]) {
    if (env["box"]) {
      for (const auto& axis : as<Mat>(env["box"], "envelope.box")) {
        if (axis.size() != 2) throw ConfigError("envelope.box: each axis is [lo, hi]");
        cfg.box.bounds.emplace_back(axis[0], axis[1]);
      }
    }
    cfg.resolution = get_or<std::size_t>(env, "resolution", "envelope.resolution", cfg.resolution);
  }
  if (cfg.box.bounds.empty() && cfg.x0.size() == n) {
    for (double x : cfg.x0) cfg.box.bounds.emplace_back(x - 10.0, x + 10.0);
  }

  if (const YAML::Node tests = root["test_functions"]) {
    for (std::size_t j = 0; j < tests.size(); ++j) {
      cfg.test_functions.push_back(
          parse_test_function(tests[j], "test_functions[" + std::to_string(j) + "]"));
    }
  }
  cfg.output_dir = get_or<std::string>(root, "output", "output", "out");

  if (const YAML::Node nov = root["novikov"]) {
    cfg.novikov.se_ratio = get_or(nov, "se_ratio", "novikov.se_ratio", cfg.novikov.se_ratio);
    cfg.novikov.warn_share = get_or(nov, "warn_share", "novikov.warn_share", cfg.novikov.warn_share);
    cfg.novikov.fail_share = get_or(nov, "fail_share", "novikov.fail_share", cfg.novikov.fail_share);
    cfg.novikov.probe_points = get_or<Mat>(nov, "probes", "novikov.probes", {});
  }
  if (const YAML::Node cmp = root["compare"]) {
    auto& c = cfg.compare;
    c.times = get_or<Vec>(cmp, "times", "compare.times", c.times);
    c.tolerance = get_or(cmp, "tolerance", "compare.tolerance", c.tolerance);
    c.bootstrap = get_or(cmp, "bootstrap", "compare.bootstrap", c.bootstrap);
    c.slack = get_or(cmp, "slack", "compare.slack", c.slack);
    c.quasi_monotone_probes =
        get_or(cmp, "quasi_monotone_probes", "compare.quasi_monotone_probes", c.quasi_monotone_probes);
    c.quasi_monotone_tol = get_or(cmp, "quasi_monotone_tol", "compare.quasi_monotone_tol", c.quasi_monotone_tol);
    c.thresholds = get_or<Vec>(cmp, "thresholds", "compare.thresholds", c.thresholds);
    c.ess_floor = get_or(cmp, "ess_floor", "compare.ess_floor", c.ess_floor);
    c.filtration_equal = get_or(cmp, "filtration_equal", "compare.filtration_equal", c.filtration_equal);
  }
  if (const YAML::Node sc = root["scaling"]) {
    cfg.scaling.anchor = get_or(sc, "anchor", "scaling.anchor", cfg.scaling.anchor);
    cfg.scaling.lags = get_or<std::vector<std::size_t>>(sc, "lags", "scaling.lags", {});
  }
  if (const YAML::Node lb = root["linear_bound"]) cfg.linear_bound = parse_linear(lb, "linear_bound");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace sdecmp
