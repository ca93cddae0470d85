#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sdecmp/core/config.hpp"
#include "sdecmp/core/drift.hpp"
#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/paths.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/core/stats.hpp"
#include "sdecmp/core/test_function.hpp"
#include "sdecmp/core/time_grid.hpp"

using namespace sdecmp;

TEST_CASE("time grid knots") {
  const TimeGrid g(2.0, 8);
  CHECK(g.dt() == 0.25);
  CHECK(g.time(0) == 0.0);
  CHECK(g.time(8) == 2.0);
  const auto knots = g.knots();
  CHECK(knots.size() == 9);
  for (std::size_t k = 1; k < knots.size(); ++k) CHECK(knots[k] > knots[k - 1]);
  CHECK(g.knot_at(0.5) == 2);
  CHECK_FALSE(g.find_knot(0.3).has_value());
  CHECK_THROWS_AS(g.knot_at(0.3), ConfigError);
  CHECK_THROWS_AS(TimeGrid(0.0, 4), ConfigError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), ConfigError);
  CHECK(g.coarsened(2) == TimeGrid(2.0, 4));
}

TEST_CASE("philox known-answer vectors") {
  using B = std::array<std::uint32_t, 4>;
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams are independent of each other") {
  Philox4x32 a(7, 0), b(7, 1), a2(7, 0);
  int same = 0;
  for (int i = 0; i < 64; ++i) {
    const auto x = a();
    same += x == b() ? 1 : 0;
    CHECK(x == a2());
  }
  CHECK(same < 2);
  Philox4x32 u(3, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform01();
    CHECK((v > 0.0 && v < 1.0));
    CHECK(u.below(7) < 7);
  }
}

TEST_CASE("sampling is deterministic and independent of worker count") {
  const TimeGrid g(1.0, 16);
  const auto a = sample_increments(g, 1000, 2, 42, 128, 1);
  const auto b = sample_increments(g, 1000, 2, 42, 128, 3);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  const auto c = sample_increments(g, 1000, 2, 43, 128, 1);
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
  CHECK_THROWS_AS(sample_increments(g, 0, 1, 1), ConfigError);
  CHECK_THROWS_AS(sample_increments(g, std::size_t{1} << 40, 1, 1), ResourceError);
}

TEST_CASE("one-step increments: CLT mean and variance") {
  const TimeGrid g(1.0, 256);
  const std::size_t n = 100000;
  const auto inc = sample_increments(g, n, 1, 2024);
  for (std::size_t k : {std::size_t{0}, std::size_t{100}, std::size_t{255}}) {
    std::vector<double> xs(n);
    for (std::size_t p = 0; p < n; ++p) xs[p] = inc.at(p, k, 0);
    const MeanSe m = mean_se(xs);
    CHECK(std::abs(m.mean) <= 4.0 * std::sqrt(g.dt() / n));
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    CHECK(std::abs(ss / (n - 1) / g.dt() - 1.0) < 0.05);
  }
}

TEST_CASE("coarsened increments sum fine ones") {
  const TimeGrid g(1.0, 8);
  const auto inc = sample_increments(g, 3, 2, 5);
  const auto coarse = inc.coarsened(4);
  CHECK(coarse.grid() == TimeGrid(1.0, 2));
  CHECK(coarse.at(1, 1, 0) ==
        doctest::Approx(inc.at(1, 4, 0) + inc.at(1, 5, 0) + inc.at(1, 6, 0) + inc.at(1, 7, 0)));
  CHECK(inc.scaled(0.5).at(2, 3, 1) == 0.5 * inc.at(2, 3, 1));
}

TEST_CASE("accumulate_paths") {
  const TimeGrid g(1.0, 4);
  IncrementBatch zero(g, 2, 2, 0, 4, std::vector<double>(16, 0.0));
  const std::vector<double> x0{1.5, -2.0};
  const auto paths = accumulate_paths(zero, x0);
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(paths.at(p, k, 0) == 1.5);
      CHECK(paths.at(p, k, 1) == -2.0);
    }
    CHECK(paths.state(p).status == PathStatus::alive);
  }
  IncrementBatch one(TimeGrid(1.0, 1), 1, 1, 0, 1, {0.37});
  const std::vector<double> origin{0.0};
  CHECK(accumulate_paths(one, origin).at(0, 1, 0) == 0.37);
}

TEST_CASE("Brownian terminal second moment and quadratic variation") {
  const TimeGrid g(1.0, 64);
  const std::size_t n = 100000, dim = 2;
  const auto inc = sample_increments(g, n, dim, 11);
  const std::vector<double> x0(dim, 0.0);
  const auto paths = accumulate_paths(inc, x0);
  std::vector<double> sq(n), qv(n);
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += paths.at(p, 64, i) * paths.at(p, 64, i);
    sq[p] = s;
    double q = 0.0;
    for (std::size_t k = 0; k < 64; ++k) q += inc.at(p, k, 0) * inc.at(p, k, 0);
    qv[p] = q;
    CHECK(paths.at(p, 0, 0) == 0.0);
  }
  const MeanSe m = mean_se(sq);
  CHECK(std::abs(m.mean - dim * g.horizon()) <= 3.0 * m.se);
  const MeanSe q = mean_se(qv);
  CHECK(std::abs(q.mean - g.horizon()) <= 5.0 * q.se);
}

TEST_CASE("drift catalog") {
  const auto c = build_drift({ConstantDrift{{1.0, 0.0}}});
  const std::vector<double> anywhere{3.0, -7.0};
  CHECK(c(anywhere) == std::vector<double>{1.0, 0.0});

  LinearDrift zero{Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2)};
  CHECK(build_drift({zero})(anywhere) == std::vector<double>{0.0, 0.0});

  LinearDrift lin{Eigen::MatrixXd(2, 2), Eigen::VectorXd(2)};
  lin.matrix << 1, 2, 3, 4;
  lin.offset << 0.5, -0.5;
  const auto l = build_drift({lin})(anywhere);
  CHECK(l[0] == 1 * 3.0 + 2 * -7.0 + 0.5);
  CHECK(l[1] == 3 * 3.0 + 4 * -7.0 - 0.5);

  const auto t = build_drift({BoundedDrift{BoundedShape::tanh, 2, 1.0, 1.0, 0.0}});
  CHECK(t(anywhere)[0] == doctest::Approx(std::tanh(3.0)));
  CHECK(*t.traits().sup_bound == doctest::Approx(std::sqrt(2.0)));
  CHECK(t.traits().lipschitz);

  const auto s = build_drift({BoundedDrift{BoundedShape::shifted_sine, 1, 1.0, 1.0, 2.0}});
  const std::vector<double> x{0.7};
  CHECK(s(x)[0] == doctest::Approx(2.0 + std::sin(0.7)));
  CHECK(*s.traits().sup_bound == doctest::Approx(3.0));

  const auto sq = build_drift({PolynomialDrift{{{0.0, 0.0, 1.0}}}});
  CHECK(sq(x)[0] == doctest::Approx(0.49));
  CHECK_FALSE(sq.traits().lipschitz);
}

TEST_CASE("grid-sampled drift interpolates x^2 within one cell") {
  GridDrift g;
  std::vector<double> axis;
  for (int j = 0; j <= 40; ++j) axis.push_back(-2.0 + 0.1 * j);
  g.axes = {axis};
  for (double a : axis) g.values.push_back(a * a);
  const auto b = build_drift({g});
  const std::vector<double> one{1.0}, mid{1.05}, far{5.0};
  // Linear interpolation error of x^2 is at most h^2/4.
  CHECK(std::abs(b(one)[0] - 1.0) <= 0.1 * 0.1 / 4 + 1e-12);
  CHECK(std::abs(b(mid)[0] - 1.05 * 1.05) <= 0.1 * 0.1 / 4 + 1e-12);
  CHECK(b(far)[0] == doctest::Approx(4.0));

  GridDrift bad{{{0.0, 1.0, 0.5}}, {0.0, 1.0, 2.0}};
  CHECK_THROWS_WITH_AS(build_drift({bad}), doctest::Contains("malformed grid table"), ConfigError);
}

TEST_CASE("test functions") {
  const TestFunction c(ConstantTest{{1.0, -1.0}});
  CHECK(c(0.3) == std::vector<double>{1.0, -1.0});
  const TestFunction pc(PiecewiseConstantTest{{0.5}, {{1.0}, {2.0}}});
  CHECK(pc(0.2)[0] == 1.0);
  CHECK(pc(0.5)[0] == 2.0);
  CHECK(pc(0.9)[0] == 2.0);
  FourierTest f;
  f.period = 1.0;
  f.mean = {0.5};
  f.cos_terms = {{1.0}};
  f.sin_terms = {{0.25}};
  const TestFunction fo(f);
  CHECK(fo(0.25)[0] == doctest::Approx(0.5 + 0.25));
  CHECK(fo.sup_bound() >= 1.75 - 1e-12);
}

TEST_CASE("stats helpers") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const MeanSe m = mean_se(xs);
  CHECK(m.mean == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(effective_sample_size(xs) == doctest::Approx(100.0 / 30.0));
  CHECK(quantile(xs, 0.5) == 2.5);
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(normal_critical(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);
}

TEST_CASE("config parsing") {
  const std::string yaml = R"(
drift: {kind: tanh, dim: 2}
x0: [0.0, 0.5]
grid: {horizon: 1.0, steps: 64}
sampling: {paths: 1000, seed: 9}
envelope: {box: [[-3, 3], [-3, 3]], resolution: 65}
test_functions:
  - {kind: constant, value: [1.0, 0.0]}
  - {kind: fourier, period: 1.0, mean: [0, 0], cos: [[1, 0]], sin: [[0, 1]]}
compare: {times: [0.5, 1.0], tolerance: 0.03}
)";
  const auto cfg = parse_config(yaml);
  CHECK(cfg.drift.dim() == 2);
  CHECK(cfg.grid == TimeGrid(1.0, 64));
  CHECK(cfg.n_paths == 1000);
  CHECK(cfg.seed == 9);
  CHECK(cfg.resolution == 65);
  CHECK(cfg.test_functions.size() == 2);
  CHECK(cfg.compare.tolerance == 0.03);

  CHECK_THROWS_WITH_AS(parse_config("drift: {kind: tanh}\nx0: [0]\ngrid: {horizon: 1}\nsampling: {paths: 1, seed: 1}\n"),
                       doctest::Contains("grid.steps"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("x0: [0]\n"), doctest::Contains("drift"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config("drift: {kind: tanh}\nx0: [5]\ngrid: {horizon: 1, steps: 4}\nsampling: {paths: 1, seed: 1}\n"
                   "envelope: {box: [[-1, 1]]}\n"),
      doctest::Contains("x0"), ConfigError);
  CHECK_THROWS_AS(parse_config("drift: {kind: nope}\n"), ConfigError);
}
