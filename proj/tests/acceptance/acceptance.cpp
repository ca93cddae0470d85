// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "sdecmp/cli/cli.hpp"
#include "sdecmp/compare/compare.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/drift_analysis/envelope.hpp"
#include "sdecmp/girsanov/girsanov.hpp"
#include "sdecmp/integrate/integrate.hpp"
#include "sdecmp/linear_bound/linear_bound.hpp"
#include "sdecmp/zdual/duality.hpp"

using namespace sdecmp;
namespace fs = std::filesystem;

namespace {

constexpr double kBand = 5.0;
std::size_t g_workers = 1;
fs::path g_configs;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) xs[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return xs;
}

std::vector<TestFunction> catalog_tests(std::size_t dim) {
  std::vector<TestFunction> fs;
  fs.emplace_back(ConstantTest{std::vector<double>(dim, 0.5)});
  fs.emplace_back(ConstantTest{std::vector<double>(dim, -1.0)});
  fs.emplace_back(PiecewiseConstantTest{{0.5}, {std::vector<double>(dim, 0.8), std::vector<double>(dim, -0.4)}});
  FourierTest a;
  a.mean.assign(dim, -0.3);
  a.cos_terms = {std::vector<double>(dim, 0.4)};
  a.sin_terms = {std::vector<double>(dim, 0.2)};
  fs.emplace_back(a);
  FourierTest b;
  b.period = 2.0;
  b.mean.assign(dim, 0.7);
  b.cos_terms = {std::vector<double>(dim, 0.0)};
  b.sin_terms = {std::vector<double>(dim, -0.5)};
  fs.emplace_back(b);
  return fs;
}

DriftFn tanh_drift(std::size_t dim) { return build_drift({BoundedDrift{BoundedShape::tanh, dim, 1.0, 1.0, 0.0}}); }

// 1. Mean terminal weight within 5 SE of 1 for bounded drifts.
void ac1(Outcome& o) {
  const TimeGrid grid(1.0, 256);
  const std::vector<std::pair<std::string, DriftSpec>> drifts{
      {"tanh", {BoundedDrift{BoundedShape::tanh, 1, 1.0, 1.0, 0.0}}},
      {"2+sin", {BoundedDrift{BoundedShape::shifted_sine, 1, 1.0, 1.0, 2.0}}},
      {"constant", {ConstantDrift{{1.0}}}}};
  std::uint64_t seed = 101;
  for (const auto& [name, spec] : drifts) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto inc = sample_increments(grid, 100000, 1, seed++, kDefaultChunkSize, g_workers);
    const auto paths = accumulate_paths(inc, std::vector<double>{0.0});
    const auto w = girsanov_weights(build_drift(spec), paths, inc, 100.0, g_workers);
    const auto& d = w.diagnostics();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.detail << " " << name << ": " << d.mean_weight << " +- " << d.mean_weight_se << " (" << secs << " s)";
    o.require(std::abs(d.mean_weight - 1.0) <= kBand * d.mean_weight_se, name + " normalization");
  }
}

// 2. Novikov estimate for b(x) = x, T = 1 and the constant-drift closed form.
void ac2(Outcome& o) {
  const double oracle = 1.0 / std::sqrt(std::cos(std::sqrt(2.0)));
  const TimeGrid grid(1.0, 256);
  LinearDrift lin{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)};
  const auto e = novikov_estimate(build_drift({lin}), std::vector<double>{0.0}, grid, 100000, 1, {}, kDefaultChunkSize, g_workers);
  o.detail << " b(x)=x: " << e.estimate << " +- " << e.se << " vs " << oracle << " (" << to_string(e.verdict) << ")";
  o.require(std::abs(e.estimate - oracle) <= kBand * e.se, "linear drift within 5 SE");

  const std::vector<double> c{1.0, 0.5};
  const auto k = novikov_estimate(build_drift({ConstantDrift{c}}), std::vector<double>{0.0, 0.0}, grid, 10000, 1, {}, kDefaultChunkSize, g_workers);
  const double exact = std::exp(1.25);
  o.detail << "; constant: " << k.estimate << " vs exp(1.25) rel err " << std::abs(k.estimate / exact - 1.0);
  o.require(std::abs(k.estimate - exact) <= 8.0 * std::numeric_limits<double>::epsilon() * exact, "constant drift exact");
}

// 3. Pairing against the Euler side; refinement of the systematic residual.
void ac3(Outcome& o) {
  for (std::size_t dim : {1, 2}) {
    const std::size_t n = dim == 1 ? 100000 : 40000;
    const TimeGrid grid(1.0, 64);
    const DriftFn drift = tanh_drift(dim);
    const std::vector<double> x(dim, 0.0);
    const auto batch = DualityBatch::sample(drift, x, grid, n, 301 + dim, kDefaultChunkSize, 100.0, g_workers);
    const auto strong_inc = sample_increments(grid, n, dim, 311 + dim, kDefaultChunkSize, g_workers);
    const auto euler = euler_maruyama(drift, x, strong_inc, kDefaultThresholds, g_workers);
    const auto noise = accumulate_paths(strong_inc, x);
    double worst = 0.0;
    for (const auto& f : catalog_tests(dim)) {
      const auto Y = PathFunctional::exponential(f);
      for (double t : {0.25, 0.5, 1.0}) {
        const auto weak = pairing_estimate(batch, grid.knot_at(t), Y);
        for (std::size_t i = 0; i < dim; ++i) {
          const auto strong = strong_expectation(euler.paths, noise, PathFunctional::coordinate(t, i), Y);
          const auto& w = weak[i].self_normalized;
          worst = std::max(worst, std::abs(w.estimate - strong.estimate) / std::hypot(w.se, strong.se));
        }
      }
    }
    o.detail << " " << dim << "D max |diff|/SE " << worst << ";";
    o.require(worst <= kBand, std::to_string(dim) + "D duality within 5 SE");

    // Residual at h = T/4 against the Richardson value 2 P(h/8) - P(h/4), same paths at every level.
    const auto fine = sample_increments(TimeGrid(1.0, 32), 100000, dim, 331 + dim, kDefaultChunkSize, g_workers);
    std::vector<std::vector<double>> P(4);
    const std::size_t factors[4] = {8, 4, 2, 1};
    for (int l = 0; l < 4; ++l) {
      const DualityBatch b(drift, x, factors[l] == 1 ? fine : fine.coarsened(factors[l]), 100.0, g_workers);
      for (const auto& f : catalog_tests(dim)) {
        for (double t : {0.25, 0.5, 1.0}) {
          for (const auto& pe : pairing_estimate(b, b.grid().knot_at(t), PathFunctional::exponential(f))) {
            P[l].push_back(pe.self_normalized.estimate);
          }
        }
      }
    }
    double r_h = 0.0, r_h2 = 0.0;
    for (std::size_t j = 0; j < P[0].size(); ++j) {
      const double ref = 2.0 * P[3][j] - P[2][j];
      r_h += (P[0][j] - ref) * (P[0][j] - ref);
      r_h2 += (P[1][j] - ref) * (P[1][j] - ref);
    }
    const double ratio = std::sqrt(r_h / r_h2);
    o.detail << " residual ratio " << ratio << ";";
    o.require(ratio >= 1.6 && ratio <= 2.4, std::to_string(dim) + "D refinement ratio");
  }
}

// 4. Z(1) = 1, left inverse, Jensen and positivity.
void ac4(Outcome& o) {
  const TimeGrid grid(1.0, 64);
  LinearDrift lin{Eigen::MatrixXd(2, 2), Eigen::VectorXd::Zero(2)};
  lin.matrix << -1.0, 0.5, 0.3, -0.8;
  const std::vector<std::pair<std::string, DriftSpec>> drifts{
      {"tanh", {BoundedDrift{BoundedShape::tanh, 1, 1.0, 1.0, 0.0}}},
      {"2+sin", {BoundedDrift{BoundedShape::shifted_sine, 1, 1.0, 1.0, 2.0}}},
      {"linear2d", {lin}}};
  std::uint64_t seed = 401;
  double worst_z1 = 0.0, worst_li = 0.0, worst_jensen = 0.0;
  std::size_t negatives = 0;
  for (const auto& [name, spec] : drifts) {
    const std::size_t dim = spec.dim();
    const std::vector<double> x(dim, 0.1);
    const auto batch = DualityBatch::sample(build_drift(spec), x, grid, 40000, seed++, kDefaultChunkSize, 100.0, g_workers);
    const auto tests = catalog_tests(dim);
    std::vector<PathFunctional> Ys;
    for (std::size_t j : {0, 2, 3}) Ys.push_back(PathFunctional::exponential(tests[j]));
    Ys.push_back(PathFunctional::cylinder(ScalarMap::logistic(), 0.5, 0));

    for (const auto& Y : Ys) {
      const auto r = left_inverse_residual(batch, PathFunctional::constant(1.0), Y);
      worst_z1 = std::max(worst_z1, std::abs(r.estimate) / r.se);
    }
    const std::vector<std::pair<PathFunctional, PathFunctional>> pairs{
        {PathFunctional::cylinder(ScalarMap::sine(), 0.5, 0), Ys[0]},
        {PathFunctional::cylinder(ScalarMap::hyperbolic_tangent(), 1.0, dim - 1), Ys[1]},
        {PathFunctional::cylinder(ScalarMap::cosine(), 0.25, 0), Ys[3]}};
    for (const auto& [U, Y] : pairs) {
      const auto r = left_inverse_residual(batch, U, Y);
      worst_li = std::max(worst_li, std::abs(r.estimate) / r.se);
    }
    const auto strong_inc = sample_increments(grid, 40000, dim, seed++, kDefaultChunkSize, g_workers);
    const std::vector<PathFunctional> nonneg{PathFunctional::constant(1.0), Ys[0], Ys[3]};
    for (const auto& phi : {ScalarMap::square(), ScalarMap::absolute()}) {
      const auto rep = jensen_gap(batch, phi, PathFunctional::coordinate(1.0, 0), nonneg, strong_inc, g_workers);
      for (const auto& c : rep.cases) worst_jensen = std::max(worst_jensen, -c.gap / c.se);
    }
    for (const auto& Y : Ys) {
      for (double t : pairing_terms(batch, PathFunctional::cylinder(ScalarMap::square(), 1.0, 0), Y)) negatives += t < 0.0;
    }
  }
  o.detail << " Z(1) max |r|/SE " << worst_z1 << "; left inverse max |r|/SE " << worst_li
           << "; Jensen min gap/SE " << -worst_jensen << "; negative terms " << negatives;
  o.require(worst_z1 <= kBand, "Z(1) = 1");
  o.require(worst_li <= kBand, "left inverse");
  o.require(worst_jensen <= kBand, "Jensen gap");
  o.require(negatives == 0, "positivity");
}

// 5. Hull versus biconjugate, analytic envelopes, midpoint convexity.
void ac5(Outcome& o) {
  Philox4x32 rng(5005, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 100 + rng.below(900);
    const auto xs = linspace(-4.0, 4.0, n);
    std::vector<double> hs(n);
    const double a = 2.0 * rng.uniform01(), w = 0.5 + 5.0 * rng.uniform01(), c = rng.uniform01() - 0.3;
    for (std::size_t j = 0; j < n; ++j) hs[j] = a * std::sin(w * xs[j]) + c * xs[j] * xs[j] + 0.2 * (rng.uniform01() - 0.5);
    const auto hull = lower_convex_envelope_1d(xs, hs);
    const auto bic = biconjugate_1d(xs, hs);
    for (double x : xs) worst = std::max(worst, std::abs(hull(x) - bic(x)));
  }
  o.detail << " hull-biconjugate max " << worst << ";";
  o.require(worst <= 1e-8, "hull vs biconjugate");

  const auto xs = linspace(-2.0, 2.0, 401);
  std::vector<double> well, quartic;
  for (double x : xs) {
    well.push_back(std::abs(x * x - 1.0));
    quartic.push_back(x * x * x * x - 2.0 * x * x);
  }
  const auto ew = lower_convex_envelope_1d(xs, well);
  const auto eq = lower_convex_envelope_1d(xs, quartic);
  double analytic = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double x = xs[j];
    analytic = std::max(analytic, std::abs(ew(x) - std::max(x * x - 1.0, 0.0)));
    analytic = std::max(analytic, std::abs(eq(x) - (std::abs(x) <= 1.0 ? -1.0 : quartic[j])));
  }
  o.detail << " analytic max " << analytic << ";";
  o.require(analytic <= 1e-12, "analytic envelopes");

  std::size_t bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const double a = -2.0 + 4.0 * rng.uniform01(), b = -2.0 + 4.0 * rng.uniform01();
    for (const auto* e : {&ew, &eq}) bad += (*e)(0.5 * (a + b)) > 0.5 * (*e)(a) + 0.5 * (*e)(b) + 1e-12;
  }
  o.detail << " midpoint violations " << bad;
  o.require(bad == 0, "midpoint convexity");
}

// 6. Dominance for 2 + sin against its boxed envelope; coupled pathwise check.
void ac6(Outcome& o) {
  const DriftSpec spec{BoundedDrift{BoundedShape::shifted_sine, 1, 1.0, 1.0, 2.0}};
  const DriftFn drift = build_drift(spec);
  const std::vector<double> x{0.0};
  const Box box{{{-4 * std::numbers::pi, 4 * std::numbers::pi}}};
  const auto env = envelope_drift(spec, box, 4097, x);
  const TimeGrid grid(1.0, 256);
  const auto batch = DualityBatch::sample(drift, x, grid, 100000, 601, kDefaultChunkSize, 100.0, g_workers);
  const auto inc = sample_increments(grid, 100000, 1, 602, kDefaultChunkSize, g_workers);
  const auto coupled = coupled_solve({drift, env.drift}, x, inc, kDefaultThresholds, g_workers);
  DominanceSettings s;
  s.tolerance = 0.02;
  s.seed = 603;
  s.workers = g_workers;
  for (std::size_t knot : {128, 256}) {
    const auto r = dominance_check(weak_law_samples(batch, knot), coupled[1].paths, knot, s);
    o.detail << " t=" << r.time << ": " << to_string(r.verdict) << " (max UCB " << r.coordinates[0].max_ucb
             << ", tol " << r.effective_tolerance << ", ESS " << r.ess_z << ");";
    o.require(r.verdict == DominanceVerdict::dominates, "dominance at t=" + std::to_string(r.time));
  }
  const auto pw = pathwise_compare(coupled[0].paths, coupled[1].paths, coupled[1].explosion, 1e-12);
  o.detail << " pathwise violations " << pw.total_violations() << ", min gap " << pw.coordinates[0].min_gap;
  o.require(pw.total_violations() == 0, "pathwise");
}

// 7. Linear bound: Euler against the closed form; fundamental-matrix checks.
void ac7(Outcome& o) {
  Eigen::MatrixXd A(2, 2);
  A << -1.0, 0.5, 0.3, -0.8;
  const auto params = LinearDriftParams::from(A, Eigen::Vector2d(0.2, -0.1));
  o.require(params.off_diagonal_nonneg, "nonnegative off-diagonal");
  const std::vector<double> x0{0.5, -0.5};
  const TimeGrid grid(1.0, 256);
  const auto inc = sample_increments(grid, 4000, 2, 701, kDefaultChunkSize, g_workers);
  const DriftFn lin = build_drift({LinearDrift{A, params.offset}});
  auto median_err = [&](const IncrementBatch& in) {
    const auto e = euler_maruyama(lin, x0, in, kDefaultThresholds, g_workers).paths;
    const auto c = linear_solution_path(params, x0, in, g_workers);
    std::vector<double> worst;
    for (std::size_t p = 0; p < e.n_paths(); ++p) {
      double m = 0.0;
      for (std::size_t k = 0; k < e.grid().n_knots(); ++k)
        for (std::size_t i = 0; i < 2; ++i) m = std::max(m, std::abs(e.at(p, k, i) - c.at(p, k, i)));
      worst.push_back(m);
    }
    return quantile(worst, 0.5);
  };
  const double err = median_err(inc);
  const double err2 = median_err(inc.coarsened(2));
  const double ratio = err2 / err;
  o.detail << " median max error " << err << " (" << err / grid.dt() << " dt), ratio " << ratio << ";";
  o.require(err <= 5.0 * grid.dt(), "error <= 5 dt");
  o.require(ratio >= 1.7 && ratio <= 2.3, "first-order refinement");

  const auto series = fundamental_matrix(A, grid);
  double semigroup = 0.0;
  for (std::size_t k = 0; k <= 256; k += 8)
    for (std::size_t j = 0; k + j <= 256; j += 8) {
      semigroup = std::max(semigroup, (series.phi[k + j] - series.phi[k] * series.phi[j]).cwiseAbs().maxCoeff());
    }
  const double ode = matrix_ode_check(A, grid);
  Eigen::MatrixXd N(2, 2);
  N << 0.0, 1.0, 0.0, 0.0;
  double nil = 0.0;
  for (double t : {0.3, 1.0, 2.5}) {
    Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(2, 2) + t * N;
    nil = std::max(nil, (matrix_exponential(N, t) - expect).cwiseAbs().maxCoeff());
  }
  o.detail << " semigroup " << semigroup << ", ODE " << ode << ", nilpotent " << nil;
  o.require(semigroup <= 1e-9, "semigroup");
  o.require(ode <= 1e-8, "ODE oracle");
  o.require(nil <= 1e-12, "nilpotent");
}

// 8. Moment-scaling slope for b = 0 and b = tanh.
void ac8(Outcome& o) {
  const TimeGrid grid(1.0, 256);
  const std::vector<double> x{0.0};
  const auto inc = sample_increments(grid, 100000, 1, 801, kDefaultChunkSize, g_workers);
  for (const auto& [name, drift] : {std::pair{std::string("zero"), zero_drift(1)}, std::pair{std::string("tanh"), tanh_drift(1)}}) {
    const auto fit = kolmogorov_scaling(drift, x, inc, {0.25, kDefaultScalingLags, 200, 802, g_workers});
    o.detail << " " << name << ": slope " << fit.slope << " [" << fit.ci_lower << ", " << fit.ci_upper << "] over "
             << fit.lags.size() << " lags;";
    o.require(fit.lags.size() == 6, name + " lag count");
    o.require(fit.slope >= 1.3 && fit.slope <= 1.7, name + " slope");
  }
}

// 9. Two compare runs with the same config and seed give identical CSVs.
void ac9(Outcome& o) {
  const fs::path base = fs::temp_directory_path() / "sdecmp_acceptance_ac9";
  fs::remove_all(base);
  const std::string cfg = (g_configs / "compare_shifted_sine.yaml").string();
  std::ostringstream sink;
  RunOptions a, b;
  a.output = base / "a";
  a.workers = 1;
  b.output = base / "b";
  b.workers = 2;
  const int ca = cmd_compare(cfg, a, sink);
  const int cb = cmd_compare(cfg, b, sink);
  o.require(ca == kExitPass && cb == kExitPass, "compare runs exit 0");
  std::size_t files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(base / "a" / "csv")) {
    std::ifstream fa(entry.path(), std::ios::binary), fb(base / "b" / "csv" / entry.path().filename(), std::ios::binary);
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    ++files;
    differ += sa.str() != sb.str();
  }
  o.detail << " " << files << " CSV files compared, " << differ << " differ";
  o.require(files > 0 && differ == 0, "byte-identical CSVs");
}

}  // namespace

int main(int argc, char** argv) {
  g_configs = argc > 1 ? fs::path(argv[1]) : fs::path("tools/configs");
  g_workers = resolve_workers(0);
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"AC1 girsanov normalization", ac1}, {"AC2 novikov oracle", ac2},     {"AC3 duality identity", ac3},
      {"AC4 operator identities", ac4},    {"AC5 envelope correctness", ac5}, {"AC6 comparison", ac6},
      {"AC7 linear bound", ac7},           {"AC8 kolmogorov scaling", ac8},  {"AC9 determinism", ac9}};
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    o.detail.precision(6);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " |" << o.detail.str() << " | " << std::fixed
              << std::setprecision(1) << secs << " s" << std::defaultfloat << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
