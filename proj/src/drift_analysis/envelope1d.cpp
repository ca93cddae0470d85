#include <algorithm>
#include <cmath>
#include <limits>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/drift_analysis/envelope.hpp"

namespace sdecmp {

namespace {

constexpr double kCollinearTol = 1e-12;

bool strictly_turns_up(double s_left, double s_right) {
  const double scale = std::max({1.0, std::abs(s_left), std::abs(s_right)});
  return s_right > s_left + kCollinearTol * scale;
}

struct Samples {
  std::vector<double> xs, hs;
};

// Validates ordering; collapses exact duplicates that agree on the value.
Samples clean_samples(std::span<const double> xs, std::span<const double> hs) {
  if (xs.size() != hs.size()) throw InputError("envelope: x and h have different lengths");
  Samples s;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (!std::isfinite(xs[j]) || !std::isfinite(hs[j])) throw InputError("envelope: non-finite sample");
    if (!s.xs.empty()) {
      if (xs[j] == s.xs.back()) {
        if (hs[j] != s.hs.back()) {
          throw InputError("envelope: duplicate x = " + std::to_string(xs[j]) + " with conflicting values");
        }
        continue;
      }
      if (xs[j] < s.xs.back()) throw InputError("envelope: samples must be ordered by x");
    }
    s.xs.push_back(xs[j]);
    s.hs.push_back(hs[j]);
  }
  if (s.xs.size() < 2) throw InputError("envelope: need at least 2 distinct samples");
  return s;
}

}  // namespace

PiecewiseLinearConvex1d::PiecewiseLinearConvex1d(std::vector<double> breakpoints, std::vector<double> values)
    : xs_(std::move(breakpoints)), ys_(std::move(values)) {
  if (xs_.size() < 2 || xs_.size() != ys_.size()) throw InputError("convex PL: need >= 2 breakpoints");
  for (std::size_t k = 1; k < xs_.size(); ++k) {
    if (!(xs_[k] > xs_[k - 1])) throw InputError("convex PL: breakpoints must increase");
  }
  for (std::size_t k = 1; k + 1 < xs_.size(); ++k) {
    const double a = slope(k - 1), b = slope(k);
    if (b < a - 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
      throw InputError("convex PL: slopes must not decrease");
    }
  }
}

double PiecewiseLinearConvex1d::slope(std::size_t k) const {
  return (ys_[k + 1] - ys_[k]) / (xs_[k + 1] - xs_[k]);
}

std::vector<double> PiecewiseLinearConvex1d::slopes() const {
  std::vector<double> s(xs_.size() - 1);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = slope(k);
  return s;
}

double PiecewiseLinearConvex1d::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front() + slope(0) * (x - xs_.front());
  if (x >= xs_.back()) return ys_.back() + slope(xs_.size() - 2) * (x - xs_.back());
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const auto k = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double t = (x - xs_[k]) / (xs_[k + 1] - xs_[k]);
  return ys_[k] + t * (ys_[k + 1] - ys_[k]);
}

std::pair<double, double> PiecewiseLinearConvex1d::subgradient(double x) const {
  const std::size_t last = xs_.size() - 2;
  if (x < xs_.front()) return {slope(0), slope(0)};
  if (x > xs_.back()) return {slope(last), slope(last)};
  const auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
  const auto k = static_cast<std::size_t>(it - xs_.begin());
  if (*it == x) {
    return {k == 0 ? slope(0) : slope(k - 1), k > last ? slope(last) : slope(k)};
  }
  return {slope(k - 1), slope(k - 1)};
}

CsvTable PiecewiseLinearConvex1d::to_csv() const {
  CsvTable t({"breakpoint", "value"});
  for (std::size_t k = 0; k < xs_.size(); ++k) t.add_row({xs_[k], ys_[k]});
  return t;
}

PiecewiseLinearConvex1d lower_convex_envelope_1d(std::span<const double> xs, std::span<const double> hs) {
  const Samples s = clean_samples(xs, hs);
  std::vector<std::size_t> hull;
  auto slope = [&](std::size_t a, std::size_t b) { return (s.hs[b] - s.hs[a]) / (s.xs[b] - s.xs[a]); };
  for (std::size_t j = 0; j < s.xs.size(); ++j) {
    while (hull.size() >= 2 &&
           !strictly_turns_up(slope(hull[hull.size() - 2], hull.back()), slope(hull.back(), j))) {
      hull.pop_back();
    }
    hull.push_back(j);
  }
  std::vector<double> bx, by;
  for (std::size_t j : hull) {
    bx.push_back(s.xs[j]);
    by.push_back(s.hs[j]);
  }
  return PiecewiseLinearConvex1d(std::move(bx), std::move(by));
}

PiecewiseLinearConvex1d biconjugate_1d(std::span<const double> xs, std::span<const double> hs) {
  const Samples s = clean_samples(xs, hs);
  const std::size_t n = s.xs.size();
  const double xmax = std::max(std::abs(s.xs.front()), std::abs(s.xs.back()));
  double hmax = 0.0;
  for (double h : s.hs) hmax = std::max(hmax, std::abs(h));

  // h*(s) = max_i (s x_i - h_i) and one maximizer.
  auto conjugate = [&](double slope) {
    std::size_t best = 0;
    double value = slope * s.xs[0] - s.hs[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double v = slope * s.xs[i] - s.hs[i];
      if (v > value) {
        value = v;
        best = i;
      }
    }
    return std::pair{value, best};
  };

  // Supporting lines (slope, h*(slope)). Between two known contact points a < b
  // the chord slope either supports both (an edge of the envelope) or exposes a
  // contact point strictly between them.
  std::vector<std::pair<double, double>> lines;
  std::vector<std::pair<std::size_t, std::size_t>> work{{0, n - 1}};
  while (!work.empty()) {
    const auto [a, b] = work.back();
    work.pop_back();
    const double chord = (s.hs[b] - s.hs[a]) / (s.xs[b] - s.xs[a]);
    const auto [value, k] = conjugate(chord);
    const double base = chord * s.xs[a] - s.hs[a];
    const double tol = kCollinearTol * (1.0 + hmax + std::abs(chord) * xmax);
    if (value <= base + tol || k == a || k == b) {
      lines.emplace_back(chord, value);
    } else {
      work.emplace_back(a, k);
      work.emplace_back(k, b);
    }
  }

  // h**(x_j) = max over supporting lines.
  std::vector<double> env(n);
  for (std::size_t j = 0; j < n; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [slope, value] : lines) best = std::max(best, slope * s.xs[j] - value);
    env[j] = best;
  }

  std::vector<double> bx{s.xs[0]}, by{env[0]};
  for (std::size_t j = 1; j < n; ++j) {
    while (bx.size() >= 2) {
      const std::size_t m = bx.size();
      const double left = (by[m - 1] - by[m - 2]) / (bx[m - 1] - bx[m - 2]);
      const double right = (env[j] - by[m - 1]) / (s.xs[j] - bx[m - 1]);
      if (strictly_turns_up(left, right)) break;
      bx.pop_back();
      by.pop_back();
    }
    bx.push_back(s.xs[j]);
    by.push_back(env[j]);
  }
  return PiecewiseLinearConvex1d(std::move(bx), std::move(by));
}

double PiecewiseLinearConvex::operator()(std::span<const double> x) const {
  if (x.size() != dim()) throw InputError("convex PL: point has wrong dimension");
  if (const auto* f = as_1d()) return (*f)(x[0]);
  return (*as_2d())(x[0], x[1]);
}

std::vector<double> PiecewiseLinearConvex::subgradient(std::span<const double> x) const {
  if (x.size() != dim()) throw InputError("convex PL: point has wrong dimension");
  if (const auto* f = as_1d()) return {f->subgradient(x[0]).second};
  const auto g = as_2d()->subgradient(x[0], x[1]);
  return {g[0], g[1]};
}

CsvTable PiecewiseLinearConvex::to_csv() const {
  if (const auto* f = as_1d()) return f->to_csv();
  return as_2d()->to_csv();
}

}  // namespace sdecmp
