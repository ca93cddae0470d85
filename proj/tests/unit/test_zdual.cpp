#include <doctest.h>

#include <cmath>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/integrate/integrate.hpp"
#include "sdecmp/linear_bound/linear_bound.hpp"
#include "sdecmp/zdual/duality.hpp"

using namespace sdecmp;

namespace {

const TimeGrid kGrid(1.0, 64);

DriftFn tanh_drift(std::size_t dim) { return build_drift({BoundedDrift{BoundedShape::tanh, dim, 1.0, 1.0, 0.0}}); }

PathFunctional ef(std::vector<double> c) { return PathFunctional::exponential(TestFunction(ConstantTest{std::move(c)})); }

}  // namespace

TEST_CASE("functionals evaluate on knots only") {
  IncrementBatch inc(TimeGrid(1.0, 4), 1, 1, 0, 1, {0.1, 0.2, -0.3, 0.4});
  const auto paths = accumulate_paths(inc, std::vector<double>{1.0});
  const auto view = paths.view(0);
  const TimeGrid& g = paths.grid();
  CHECK(PathFunctional::coordinate(0.5, 0).evaluate(view, g) == doctest::Approx(1.3));
  CHECK(PathFunctional::cylinder(ScalarMap::square(), 1.0, 0).evaluate(view, g) == doctest::Approx(1.4 * 1.4));
  CHECK(ef({2.0}).evaluate(view, g) == doctest::Approx(std::exp(2.0 * 0.4 - 2.0)));
  const auto combo = (PathFunctional::constant(2.0) + PathFunctional::coordinate(0.25, 0)).scaled(0.5);
  CHECK(combo.evaluate(view, g) == doctest::Approx(0.5 * (2.0 + 1.1)));
  CHECK_THROWS_AS(PathFunctional::coordinate(0.3, 0).evaluate(view, g), ConfigError);
  CHECK(PathFunctional::cylinder(ScalarMap::sine(), 0.5, 0).bounded());
  CHECK_FALSE(PathFunctional::coordinate(0.5, 0).bounded());
  CHECK(ef({1.0}).nonnegative());
}

TEST_CASE("pairing: zero and constant drift") {
  const std::vector<double> x{0.4, -0.3};
  const auto zero = DualityBatch::sample(zero_drift(2), x, kGrid, 20000, 1);
  const auto p0 = pairing_estimate(zero, 64, PathFunctional::constant(1.0));
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(p0[i].self_normalized.estimate - x[i]) <= 3.0 * p0[i].self_normalized.se + 1e-15);

  const std::vector<double> c{0.5, -1.0};
  const auto cb = DualityBatch::sample(build_drift({ConstantDrift{c}}), x, kGrid, 20000, 2);
  for (std::size_t knot : {16, 64}) {
    const auto pc = pairing_estimate(cb, knot, PathFunctional::constant(1.0));
    for (std::size_t i = 0; i < 2; ++i) {
      const double expected = x[i] + c[i] * kGrid.time(knot);
      CHECK(std::abs(pc[i].self_normalized.estimate - expected) <= 4.0 * pc[i].self_normalized.se);
      CHECK(std::abs(pc[i].unnormalized.estimate - expected) <= 4.0 * pc[i].unnormalized.se);
    }
  }
}

TEST_CASE("pairing agrees with the Euler strong solution for tanh") {
  const std::vector<double> x{0.0};
  const auto drift = tanh_drift(1);
  const auto batch = DualityBatch::sample(drift, x, kGrid, 40000, 3);
  const auto strong_inc = sample_increments(kGrid, 40000, 1, 4);
  const auto euler = euler_maruyama(drift, x, strong_inc);
  const auto noise = accumulate_paths(strong_inc, x);
  for (double f : {-1.0, 0.5, 1.0}) {
    const auto Y = ef({f});
    const auto weak = pairing_estimate(batch, 64, Y)[0].self_normalized;
    const auto strong = strong_expectation(euler.paths, noise, PathFunctional::coordinate(1.0, 0), Y);
    CHECK(std::abs(weak.estimate - strong.estimate) <= 5.0 * std::hypot(weak.se, strong.se));
  }
}

TEST_CASE("Z(1) = 1, positivity and linearity") {
  const std::vector<double> x{0.2, 0.1};
  const auto batch = DualityBatch::sample(tanh_drift(2), x, kGrid, 20000, 5);
  const auto Y1 = PathFunctional::cylinder(ScalarMap::logistic(), 0.5, 1);
  const auto Y2 = ef({0.3, -0.6});
  for (const auto& Y : {Y1, Y2}) {
    const auto z1 = pairing(batch, PathFunctional::constant(1.0), Y).self_normalized;
    std::vector<double> direct(batch.n_paths());
    for (std::size_t p = 0; p < batch.n_paths(); ++p) direct[p] = Y.evaluate(batch.paths().view(p), batch.grid());
    const MeanSe m = mean_se(direct);
    CHECK(std::abs(z1.estimate - m.mean) <= 5.0 * std::hypot(z1.se, m.se));
  }

  const auto Xpos = PathFunctional::cylinder(ScalarMap::square(), 1.0, 0);
  for (double t : pairing_terms(batch, Xpos, Y1)) CHECK(t >= 0.0);

  const auto X = PathFunctional::coordinate(0.5, 0);
  const auto a = pairing_terms(batch, X, Y1), b = pairing_terms(batch, X, Y2);
  const auto lin = pairing_terms(batch, X, Y1.scaled(2.0) + Y2.scaled(-0.5));
  const auto xs = pairing_terms(batch, X.scaled(3.0) + Xpos, Y1);
  const auto xp = pairing_terms(batch, Xpos, Y1);
  for (std::size_t p = 0; p < batch.n_paths(); ++p) {
    CHECK(lin[p] == doctest::Approx(2.0 * a[p] - 0.5 * b[p]).epsilon(1e-12).scale(1.0));
    CHECK(xs[p] == doctest::Approx(3.0 * a[p] + xp[p]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("weak law samples and moments") {
  const std::vector<double> x{1.0, -1.0};
  const auto zero = DualityBatch::sample(zero_drift(2), x, kGrid, 10000, 6);
  const auto s0 = weak_law_samples(zero, 64);
  for (double w : s0.weights()) CHECK(w == 1.0);
  const auto m0 = z_moment(s0, 1);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(m0[i].estimate - x[i]) <= 3.0 * m0[i].se);

  // equal weights reduce to the ordinary moment
  const auto c0 = s0.coordinate(0);
  double raw2 = 0.0;
  for (double v : c0) raw2 += v * v;
  CHECK(z_moment(s0, 2, false, 0)[0].estimate == doctest::Approx(raw2 / c0.size()).epsilon(1e-12));

  const std::vector<double> c{0.8, -0.4};
  const auto cb = DualityBatch::sample(build_drift({ConstantDrift{c}}), x, kGrid, 40000, 7);
  for (std::size_t knot : {32, 64}) {
    const double t = kGrid.time(knot);
    const auto s = weak_law_samples(cb, knot);
    const auto m1 = z_moment(s, 1);
    const auto v = z_moment(s, 2, true);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(m1[i].estimate - (x[i] + c[i] * t)) <= 4.0 * m1[i].se);
      CHECK(std::abs(v[i].estimate - t) <= 5.0 * v[i].se);
    }
  }
  const WeightedSampleSet single(1, {2.0}, {1.0});
  CHECK_THROWS_AS(z_moment(single, 1), DegenerateError);
}

TEST_CASE("weak law of a linear drift matches the closed-form mean") {
  LinearDrift lin{Eigen::MatrixXd(2, 2), Eigen::VectorXd(2)};
  lin.matrix << -0.5, 0.4, 0.2, -0.3;
  lin.offset << 0.3, 0.1;
  const std::vector<double> x{0.5, -0.5};
  const TimeGrid g(1.0, 256);
  const auto batch = DualityBatch::sample(build_drift({lin}), x, g, 20000, 8);
  const auto params = LinearDriftParams::from(lin);
  for (std::size_t knot : {128, 256}) {
    const auto m = z_moment(weak_law_samples(batch, knot), 1);
    const auto exact = linear_mean(params, x, g.time(knot));
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(m[i].estimate - exact(static_cast<Eigen::Index>(i))) <= 5.0 * m[i].se);
  }
}

TEST_CASE("left-inverse residual") {
  const std::vector<double> x{0.0};
  const auto tanh = DualityBatch::sample(tanh_drift(1), x, kGrid, 40000, 9);
  const auto one = PathFunctional::constant(1.0);
  const auto r1 = left_inverse_residual(tanh, one, one);
  CHECK(r1.estimate == doctest::Approx(tanh.weights().diagnostics().mean_weight - 1.0).epsilon(1e-9));
  CHECK(std::abs(r1.estimate) <= 3.0 * r1.se);

  const auto U = PathFunctional::cylinder(ScalarMap::sine(), 0.5, 0);
  const auto r2 = left_inverse_residual(tanh, U, ef({0.7}));
  CHECK(std::abs(r2.estimate) <= 4.0 * r2.se);

  const auto zero = DualityBatch::sample(zero_drift(1), x, kGrid, 500, 10);
  const auto r0 = left_inverse_residual(zero, U, ef({0.7}));
  CHECK(r0.estimate == 0.0);
  CHECK(r0.se == 0.0);
  CHECK_THROWS_AS(left_inverse_residual(zero, PathFunctional::coordinate(1.0, 0), one), InputError);
}

TEST_CASE("Jensen gap") {
  const std::vector<double> x{0.0};
  const auto X = PathFunctional::coordinate(1.0, 0);
  const std::vector<PathFunctional> Ys{PathFunctional::constant(1.0), ef({0.5}),
                                       PathFunctional::cylinder(ScalarMap::logistic(), 0.5, 0)};

  const auto zero = DualityBatch::sample(zero_drift(1), x, kGrid, 5000, 11);
  const auto exact = jensen_gap(zero, ScalarMap::square(), X, Ys, zero.increments());
  for (const auto& c : exact.cases) CHECK(c.gap == 0.0);

  const auto tanh = DualityBatch::sample(tanh_drift(1), x, kGrid, 40000, 12);
  const auto strong_inc = sample_increments(kGrid, 40000, 1, 13);
  for (const auto& phi : {ScalarMap::square(), ScalarMap::absolute(), ScalarMap::affine(2.0, 1.0)}) {
    const auto r = jensen_gap(tanh, phi, X, Ys, strong_inc);
    CHECK(r.all_hold());
    if (phi.kind() == ScalarMap::Kind::affine) {
      for (const auto& c : r.cases) CHECK(std::abs(c.gap) <= 5.0 * c.se);
    }
  }

  const auto quad = DualityBatch::sample(build_drift({PolynomialDrift{{{0.0, 0.0, 1.0}}}}), x, kGrid, 100, 14);
  CHECK_THROWS_AS(jensen_gap(quad, ScalarMap::square(), X, Ys, strong_inc), UnsupportedError);
  CHECK_THROWS_AS(jensen_gap(tanh, ScalarMap::sine(), X, Ys, strong_inc), InputError);
  CHECK_THROWS_AS(jensen_gap(tanh, ScalarMap::square(), X, {X}, strong_inc), InputError);
}
