#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdecmp/core/config.hpp"
#include "sdecmp/core/csv.hpp"
#include "sdecmp/core/drift.hpp"

namespace sdecmp {

/// Convex piecewise-linear function of one variable. Outside
/// [breakpoints.front(), breakpoints.back()] it continues with the
/// boundary slopes.
class PiecewiseLinearConvex1d {
 public:
  /// Throws InputError unless breakpoints increase and slopes do not decrease.
  PiecewiseLinearConvex1d(std::vector<double> breakpoints, std::vector<double> values);

  double operator()(double x) const;
  /// Left and right derivatives at x.
  std::pair<double, double> subgradient(double x) const;

  const std::vector<double>& breakpoints() const { return xs_; }
  const std::vector<double>& values() const { return ys_; }
  std::vector<double> slopes() const;
  double lo() const { return xs_.front(); }
  double hi() const { return xs_.back(); }

  CsvTable to_csv() const;

 private:
  double slope(std::size_t segment) const;

  std::vector<double> xs_, ys_;
};

/// z = a x + b y + c.
struct Plane {
  double a = 0.0, b = 0.0, c = 0.0;
  double operator()(double x, double y) const { return a * x + b * y + c; }
};

struct Facet {
  Plane plane;
  std::vector<std::array<double, 3>> polygon;  // lifted vertices, counter-clockwise in (x, y)
};

/// Convex piecewise-linear function on a 2D box given by lower-hull facets.
/// Inside the box it is the max over facet planes located through a
/// cell index; outside it is the max over all planes, which continues every
/// boundary facet affinely.
class PiecewiseLinearConvex2d {
 public:
  PiecewiseLinearConvex2d(std::vector<Facet> facets, std::vector<double> x_axis,
                          std::vector<double> y_axis);

  double operator()(double x, double y) const;
  /// Gradient of a facet active at (x, y).
  std::array<double, 2> subgradient(double x, double y) const;

  const std::vector<Facet>& facets() const { return facets_; }
  CsvTable to_csv() const;

 private:
  const Facet& active(double x, double y) const;

  std::vector<Facet> facets_;
  std::vector<double> xs_, ys_;
  std::vector<std::vector<std::size_t>> cells_;  // facets overlapping each grid cell
};

/// Either dimension behind one interface.
class PiecewiseLinearConvex {
 public:
  PiecewiseLinearConvex(PiecewiseLinearConvex1d f) : f_(std::move(f)) {}
  PiecewiseLinearConvex(PiecewiseLinearConvex2d f) : f_(std::move(f)) {}

  std::size_t dim() const { return f_.index() + 1; }
  double operator()(std::span<const double> x) const;
  std::vector<double> subgradient(std::span<const double> x) const;
  const PiecewiseLinearConvex1d* as_1d() const { return std::get_if<PiecewiseLinearConvex1d>(&f_); }
  const PiecewiseLinearConvex2d* as_2d() const { return std::get_if<PiecewiseLinearConvex2d>(&f_); }
  CsvTable to_csv() const;

 private:
  std::variant<PiecewiseLinearConvex1d, PiecewiseLinearConvex2d> f_;
};

/// Lower convex hull of (x, h) samples by a monotone-chain scan. Collinear
/// interior points are dropped (relative slope tolerance 1e-12).
PiecewiseLinearConvex1d lower_convex_envelope_1d(std::span<const double> xs, std::span<const double> hs);

/// The same envelope as the Legendre-Fenchel biconjugate h** = sup_s (s x - h*(s)),
/// with slopes inserted adaptively until every supporting line is found.
PiecewiseLinearConvex1d biconjugate_1d(std::span<const double> xs, std::span<const double> hs);

/// Lower convex envelope of samples on a rectangular grid. `values` are
/// indexed [j * nx + i] for (axes[0][i], axes[1][j]). One axis delegates to
/// the 1D hull; more than two axes is unsupported.
PiecewiseLinearConvex envelope_nd(const std::vector<std::vector<double>>& axes,
                                  std::span<const double> values);

inline constexpr std::size_t kMaxEnvelopeResolution2d = 129;

struct EnvelopeDrift {
  DriftFn drift;
  /// One envelope per component; empty when the drift passes through unchanged.
  std::vector<PiecewiseLinearConvex> components;
  bool passthrough = false;
  std::size_t resolution = 0;  // samples per axis actually used
};

/// Componentwise convex envelope b-hat of the drift over `box`. Affine
/// drifts and convex quadratics pass through unchanged.
EnvelopeDrift envelope_drift(const DriftSpec& spec, const Box& box, std::size_t resolution,
                             std::span<const double> x0);

struct QuasiMonotoneWitness {
  std::vector<double> x, y;
  std::size_t coordinate = 0;
  double fx = 0.0, fy = 0.0;
};

struct QuasiMonotoneReport {
  bool pass = true;
  bool certified = false;  // exact answer (linear drift or n = 1)
  std::optional<QuasiMonotoneWitness> witness;
  std::size_t n_probes = 0;
  double tolerance = 0.0;
};

/// Checks f_i(x) <= f_i(y) + tol whenever x_i = y_i and x_j <= y_j (j != i).
/// Exact for linear drifts, randomized falsification otherwise.
QuasiMonotoneReport is_quasi_monotone(const DriftFn& f, const Box& box, std::size_t n_probes,
                                      double tol, std::uint64_t seed, std::size_t workers = 1);

}  // namespace sdecmp
