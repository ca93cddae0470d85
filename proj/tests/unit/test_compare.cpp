#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sdecmp/compare/compare.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/drift_analysis/envelope.hpp"

using namespace sdecmp;

namespace {

DriftSpec shifted_sine() { return {BoundedDrift{BoundedShape::shifted_sine, 1, 1.0, 1.0, 2.0}}; }

}  // namespace

TEST_CASE("weighted ECDF basics") {
  const std::vector<double> v{3.0, 1.0, 2.0, 2.0};
  const std::vector<double> ones(4, 1.0);
  const WeightedEcdf f(v, ones);
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == 0.25);
  CHECK(f(2.0) == 0.75);
  CHECK(f(2.5) == 0.75);
  CHECK(f(3.0) == 1.0);
  CHECK(f.quantile(0.5) == 2.0);
  CHECK(f.quantile(0.8) == 3.0);
  CHECK(f.ess() == doctest::Approx(4.0));

  const std::vector<double> atom{1.5};
  const WeightedEcdf a(atom, std::vector<double>{0.3});
  CHECK(a(1.4999) == 0.0);
  CHECK(a(1.5) == 1.0);

  const WeightedEcdf w(std::vector<double>{0.0, 1.0}, std::vector<double>{3.0, 1.0});
  CHECK(w(0.0) == 0.75);
  CHECK_THROWS_AS(WeightedEcdf(v, std::vector<double>(4, 0.0)), DegenerateError);
  CHECK_THROWS_AS(WeightedEcdf(std::vector<double>{NAN}, std::vector<double>{1.0}), DegenerateError);

  const WeightedSampleSet skew(1, {0.0, 1.0, 2.0}, {1.0, 1e-9, 1e-9});
  CHECK_THROWS_AS(weighted_ecdf(skew, 0, 2.0), DegenerateError);
  CHECK_NOTHROW(weighted_ecdf(skew, 0, 1.0));
}

TEST_CASE("weighted ECDF of a constant drift is centered at x + c t") {
  const std::vector<double> x{0.2, -0.1};
  const std::vector<double> c{0.7, -1.2};
  const TimeGrid grid(1.0, 32);
  const auto batch = DualityBatch::sample(build_drift({ConstantDrift{c}}), x, grid, 40000, 5);
  for (std::size_t knot : {16, 32}) {
    const auto samples = weak_law_samples(batch, knot);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto f = weighted_ecdf(samples, i, 100.0);
      const double median = x[i] + c[i] * grid.time(knot);
      CHECK(std::abs(f(median) - 0.5) <= 4.0 * f.se(median));
    }
  }
}

TEST_CASE("dominance is reflexive") {
  const TimeGrid grid(1.0, 16);
  const auto inc = sample_increments(grid, 5000, 2, 9);
  const auto paths = accumulate_paths(inc, std::vector<double>{0.0, 1.0});
  const auto set = WeightedSampleSet::unweighted(paths, 16);
  const auto r = dominance_check(set, set, {});
  CHECK(r.verdict == DominanceVerdict::dominates);
  CHECK(r.equality);
  CHECK(r.probes.size() == 2 * 28);
  for (const auto& p : r.probes) CHECK(p.gap == 0.0);
  CHECK(r.to_csv().str().rfind("coordinate,source,level,quantile,F_Z,F_Y,gap,gap_lcb,gap_ucb\n", 0) == 0);
}

TEST_CASE("convex drift: Z-law equals the Euler law") {
  LinearDrift lin{Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Constant(1, 0.5)};
  const DriftFn drift = build_drift({lin});
  const std::vector<double> x{0.3};
  const TimeGrid grid(1.0, 32);
  const auto batch = DualityBatch::sample(drift, x, grid, 50000, 11);
  const auto y = euler_maruyama(drift, x, sample_increments(grid, 50000, 1, 12));
  DominanceSettings s;
  s.n_bootstrap = 200;
  const auto r = dominance_check(weak_law_samples(batch, 32), y.paths, 32, s);
  CHECK(r.verdict == DominanceVerdict::dominates);
  CHECK(r.equality);
  CHECK(r.surviving_fraction == 1.0);
}

TEST_CASE("bounded drift against its envelope, with the swapped control") {
  const DriftSpec spec = shifted_sine();
  const DriftFn drift = build_drift(spec);
  const std::vector<double> x{0.0};
  const Box box{{{-4 * std::numbers::pi, 4 * std::numbers::pi}}};
  const auto env = envelope_drift(spec, box, 4097, x);
  const TimeGrid grid(1.0, 64);
  const auto batch = DualityBatch::sample(drift, x, grid, 20000, 21);
  const auto inc = sample_increments(grid, 20000, 1, 22);
  const auto coupled = coupled_solve({drift, env.drift}, x, inc);

  DominanceSettings s;
  s.n_bootstrap = 200;
  s.seed = 3;
  for (std::size_t knot : {32, 64}) {
    const auto z = weak_law_samples(batch, knot);
    const auto r = dominance_check(z, coupled[1].paths, knot, s);
    CHECK(r.verdict == DominanceVerdict::dominates);
    CHECK_FALSE(r.equality);
    CHECK(r.effective_tolerance >= 0.02);
    const auto swapped = dominance_check(WeightedSampleSet::unweighted(coupled[1].paths, knot), z, s);
    CHECK(swapped.verdict == DominanceVerdict::violated);
  }

  const auto stats = pathwise_compare(coupled[0].paths, coupled[1].paths, coupled[1].explosion);
  CHECK(stats.total_violations() == 0);
  CHECK(stats.n_compared == 20000 * 65);
  CHECK(stats.coordinates[0].min_gap >= 0.0);
}

TEST_CASE("dominance bootstrap is deterministic across worker counts") {
  const TimeGrid grid(1.0, 8);
  const auto batch = DualityBatch::sample(build_drift(shifted_sine()), std::vector<double>{0.0}, grid, 4000, 2);
  const auto z = weak_law_samples(batch, 8);
  const auto y = WeightedSampleSet::unweighted(accumulate_paths(sample_increments(grid, 4000, 1, 3), std::vector<double>{0.0}), 8);
  DominanceSettings s;
  s.n_bootstrap = 64;
  s.ess_floor = 10.0;
  const std::string one = dominance_check(z, y, s).to_csv().str();
  s.workers = 3;
  CHECK(dominance_check(z, y, s).to_csv().str() == one);
  s.seed = 2;
  CHECK(dominance_check(z, y, s).to_csv().str() != one);
}

TEST_CASE("dominance reports exploded and degenerate inputs") {
  const TimeGrid grid(1.0, 64);
  const std::vector<double> x{0.0};
  const auto inc = sample_increments(grid, 200, 1, 4);
  const auto blow = euler_maruyama(build_drift({PolynomialDrift{{{0.0, 0.0, 1.0}}}}), std::vector<double>{5.0}, inc);
  REQUIRE(blow.paths.count(PathStatus::exploded) == 200);
  const auto z = WeightedSampleSet::unweighted(accumulate_paths(inc, x), 64);
  const auto r = dominance_check(z, blow.paths, 64, {});
  CHECK(r.verdict == DominanceVerdict::inconclusive);
  REQUIRE(r.explanation);
  CHECK(r.explanation->find("exploded") != std::string::npos);
  CHECK(r.surviving_fraction == 0.0);

  const WeightedSampleSet skew(1, {0.0, 1.0, 2.0}, {1.0, 1e-9, 1e-9});
  const auto d = dominance_check(skew, skew, {});
  CHECK(d.verdict == DominanceVerdict::inconclusive);
  CHECK(d.explanation);
}

TEST_CASE("pathwise comparison") {
  const TimeGrid grid(1.0, 32);
  const std::vector<double> x{0.1, 0.2};
  const auto inc = sample_increments(grid, 500, 2, 6);
  const auto runs = coupled_solve({build_drift({ConstantDrift{{1.0, 1.0}}}), zero_drift(2)}, x, inc);
  const auto same = pathwise_compare(runs[1].paths, runs[1].paths, runs[1].explosion);
  CHECK(same.total_violations() == 0);
  CHECK(same.coordinates[0].min_gap == 0.0);

  const auto shifted = pathwise_compare(runs[0].paths, runs[1].paths, runs[1].explosion);
  CHECK(shifted.total_violations() == 0);
  for (const auto& c : shifted.coordinates)
    for (std::size_t k = 0; k < grid.n_knots(); ++k) CHECK(c.min_gap_by_knot[k] == doctest::Approx(grid.time(k)).epsilon(1e-12).scale(1.0));

  const auto reversed = pathwise_compare(runs[1].paths, runs[0].paths, runs[0].explosion);
  CHECK(reversed.total_violations() == 500 * 32 * 2);
  CHECK(reversed.coordinates[1].max_violation == doctest::Approx(1.0));
  CHECK(reversed.to_csv(grid).n_rows() == 33 * 2);

  const auto other = accumulate_paths(sample_increments(TimeGrid(1.0, 16), 500, 2, 6), x);
  CHECK_THROWS_AS(pathwise_compare(runs[0].paths, other, runs[0].explosion), InputError);

  // knots past the explosion of the reference are not compared
  const auto one = sample_increments(grid, 50, 1, 8);
  const std::vector<double> x1{2.0};
  const auto blow = coupled_solve({build_drift({PolynomialDrift{{{0.0, 0.0, 1.0}}}}), zero_drift(1)}, x1, one);
  const auto capped = pathwise_compare(blow[1].paths, blow[0].paths, blow[0].explosion);
  std::size_t expected = 0;
  for (const auto& tau : blow[0].explosion.first_crossing.back()) expected += tau ? *tau + 1 : grid.n_knots();
  CHECK(expected < 50 * grid.n_knots());
  CHECK(capped.n_compared == expected);
}

TEST_CASE("Kolmogorov moment scaling") {
  const TimeGrid grid(1.0, 32);
  const std::vector<double> x{0.0};
  const auto inc = sample_increments(grid, 100000, 1, 13);
  const auto zero = kolmogorov_scaling(zero_drift(1), x, inc);
  CHECK(zero.lags.size() == 6);
  CHECK(zero.slope >= 1.4);
  CHECK(zero.slope <= 1.6);
  CHECK(zero.ci_lower <= 1.5);
  CHECK(zero.ci_upper >= 1.5);
  CHECK(zero.ci_width() <= 0.2);
  // E|B_h|^3 = 2 sqrt(2/pi) h^{3/2}
  for (std::size_t j = 0; j < zero.lags.size(); ++j) {
    const double exact = 2.0 * std::sqrt(2.0 / std::numbers::pi) * std::pow(zero.lags[j], 1.5);
    CHECK(std::abs(zero.moments[j].estimate - exact) <= 4.0 * zero.moments[j].se);
  }

  const auto fine = sample_increments(TimeGrid(1.0, 256), 50000, 1, 14);
  const auto tanh = kolmogorov_scaling(build_drift({BoundedDrift{}}), x, fine, {0.25, {}, 100, 1, 1});
  CHECK(tanh.slope >= 1.3);
  CHECK(tanh.slope <= 1.7);
  CHECK(tanh.ci_width() <= 0.2);

  CHECK_THROWS_AS(kolmogorov_scaling(zero_drift(1), x, inc, {0.0, {1, 2, 3}, 10, 1, 1}), ConfigError);
  CHECK_THROWS_AS(kolmogorov_scaling(zero_drift(1), x, inc, {0.5, {2, 4, 8, 20}, 10, 1, 1}), ConfigError);
  CHECK_THROWS_AS(kolmogorov_scaling(build_drift({PolynomialDrift{{{0.0, 0.0, 1.0}}}}), x, inc), UnsupportedError);
}
