#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/drift_analysis/envelope.hpp"

namespace sdecmp {

namespace {

struct Lifted {
  double x, y, h;
};

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

// Counter-clockwise convex hull of point indices in the (x, y) plane,
// collinear points dropped.
std::vector<std::size_t> polygon_hull(std::vector<std::size_t> idx, const std::vector<Lifted>& pts,
                                      double tol) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
  });
  if (idx.size() < 3) return idx;
  auto turn = [&](std::size_t o, std::size_t a, std::size_t b) {
    return cross(pts[a].x - pts[o].x, pts[a].y - pts[o].y, pts[b].x - pts[o].x, pts[b].y - pts[o].y);
  };
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], idx[i]) <= tol) --k;
    hull[k++] = idx[i];
  }
  for (std::size_t i = idx.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], idx[i]) <= tol) --k;
    hull[k++] = idx[i];
  }
  hull.resize(k - 1);
  return hull;
}

class LowerHull2d {
 public:
  LowerHull2d(const std::vector<double>& xs, const std::vector<double>& ys, std::span<const double> h)
      : xs_(xs), ys_(ys) {
    const std::size_t nx = xs.size(), ny = ys.size();
    pts_.reserve(nx * ny);
    double hmax = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        pts_.push_back({xs[i], ys[j], h[j * nx + i]});
        hmax = std::max(hmax, std::abs(h[j * nx + i]));
      }
    }
    const double width = xs.back() - xs.front(), height = ys.back() - ys.front();
    diameter_ = std::hypot(width, height);
    plane_tol_ = 1e-10 * (1.0 + hmax);
    area_tol_ = 1e-12 * diameter_ * diameter_;
    box_area_ = width * height;
  }

  std::vector<Facet> build() {
    // An edge of the bottom row's 1D hull is an edge of the surface hull.
    const std::size_t nx = xs_.size();
    std::vector<double> row(nx);
    for (std::size_t i = 0; i < nx; ++i) row[i] = pts_[i].h;
    const auto bottom = lower_convex_envelope_1d(xs_, row);
    const auto a_it = std::find(xs_.begin(), xs_.end(), bottom.breakpoints()[0]);
    const auto b_it = std::find(xs_.begin(), xs_.end(), bottom.breakpoints()[1]);
    const auto a = static_cast<std::size_t>(a_it - xs_.begin());
    const auto b = static_cast<std::size_t>(b_it - xs_.begin());

    std::deque<std::size_t> queue;
    add_facet(pivot(a, b, std::nullopt), queue);
    const std::size_t cap = 4 * pts_.size() + 16;
    while (!queue.empty()) {
      const std::size_t f = queue.front();
      queue.pop_front();
      const std::vector<std::size_t> poly = polygons_[f];
      for (std::size_t e = 0; e < poly.size(); ++e) {
        const std::size_t u = poly[e], v = poly[(e + 1) % poly.size()];
        if (on_boundary(u, v)) continue;
        // The facet lies to the left of u -> v; pivot to the right.
        add_facet(pivot(v, u, facets_[f].plane), queue);
        if (facets_.size() > cap) throw DegenerateError("2D envelope: facet count runaway");
      }
    }

    double area = 0.0;
    for (const auto& poly : polygons_) area += polygon_area(poly);
    if (std::abs(area - box_area_) > 1e-8 * box_area_) {
      throw DegenerateError("2D envelope: facets do not tile the box");
    }
    return facets_;
  }

 private:
  // Lowest plane through the line p -> q supporting every point to the left
  // of p -> q; `base` is a plane already containing the line, if known.
  Plane pivot(std::size_t p, std::size_t q, std::optional<Plane> base) const {
    const Lifted& P = pts_[p];
    const Lifted& Q = pts_[q];
    const double ex = Q.x - P.x, ey = Q.y - P.y;
    Plane l0;
    if (base) {
      l0 = *base;
    } else {
      const double len2 = ex * ex + ey * ey;
      const double g = (Q.h - P.h) / len2;
      l0 = {g * ex, g * ey, P.h - g * (ex * P.x + ey * P.y)};
    }
    // d(r) = cross(e, r - p) > 0 on the left.
    const Plane d{-ey, ex, ey * P.x - ex * P.y};
    const double eps = 1e-12 * std::hypot(ex, ey) * diameter_;
    double t = std::numeric_limits<double>::infinity();
    for (const auto& r : pts_) {
      const double dr = d(r.x, r.y);
      if (dr > eps) t = std::min(t, (r.h - l0(r.x, r.y)) / dr);
    }
    if (!std::isfinite(t)) throw DegenerateError("2D envelope: pivot found no support");
    return {l0.a + t * d.a, l0.b + t * d.b, l0.c + t * d.c};
  }

  void add_facet(const Plane& plane, std::deque<std::size_t>& queue) {
    std::vector<std::size_t> on;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      if (std::abs(pts_[i].h - plane(pts_[i].x, pts_[i].y)) <= plane_tol_) on.push_back(i);
    }
    std::vector<std::size_t> poly = polygon_hull(on, pts_, area_tol_);
    if (poly.size() < 3) throw DegenerateError("2D envelope: degenerate facet");
    std::vector<std::size_t> key = poly;
    std::sort(key.begin(), key.end());
    if (!seen_.insert(key).second) return;
    Facet f;
    f.plane = plane;
    for (std::size_t i : poly) f.polygon.push_back({pts_[i].x, pts_[i].y, pts_[i].h});
    facets_.push_back(std::move(f));
    polygons_.push_back(std::move(poly));
    queue.push_back(facets_.size() - 1);
  }

  bool on_boundary(std::size_t u, std::size_t v) const {
    const Lifted& a = pts_[u];
    const Lifted& b = pts_[v];
    return (a.x == xs_.front() && b.x == xs_.front()) || (a.x == xs_.back() && b.x == xs_.back()) ||
           (a.y == ys_.front() && b.y == ys_.front()) || (a.y == ys_.back() && b.y == ys_.back());
  }

  double polygon_area(const std::vector<std::size_t>& poly) const {
    double twice = 0.0;
    for (std::size_t e = 0; e < poly.size(); ++e) {
      const Lifted& a = pts_[poly[e]];
      const Lifted& b = pts_[poly[(e + 1) % poly.size()]];
      twice += cross(a.x, a.y, b.x, b.y);
    }
    return 0.5 * twice;
  }

  const std::vector<double>& xs_;
  const std::vector<double>& ys_;
  std::vector<Lifted> pts_;
  double diameter_ = 0.0, plane_tol_ = 0.0, area_tol_ = 0.0, box_area_ = 0.0;
  std::vector<Facet> facets_;
  std::vector<std::vector<std::size_t>> polygons_;
  std::set<std::vector<std::size_t>> seen_;
};

void check_axis(const std::vector<double>& axis) {
  if (axis.size() < 3) throw InputError("2D envelope: need at least 3 points per axis");
  for (std::size_t k = 1; k < axis.size(); ++k) {
    if (!(axis[k] > axis[k - 1])) throw InputError("2D envelope: axes must be strictly increasing");
  }
}

}  // namespace

PiecewiseLinearConvex2d::PiecewiseLinearConvex2d(std::vector<Facet> facets, std::vector<double> x_axis,
                                                 std::vector<double> y_axis)
    : facets_(std::move(facets)), xs_(std::move(x_axis)), ys_(std::move(y_axis)) {
  if (facets_.empty()) throw InputError("convex PL 2D: no facets");
  const std::size_t cx = xs_.size() - 1, cy = ys_.size() - 1;
  cells_.assign(cx * cy, {});
  auto cell_range = [](const std::vector<double>& axis, double lo, double hi) {
    const auto first = std::upper_bound(axis.begin(), axis.end(), lo) - axis.begin() - 1;
    const auto last = std::lower_bound(axis.begin(), axis.end(), hi) - axis.begin();
    const auto n = static_cast<std::ptrdiff_t>(axis.size()) - 1;
    return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(first, 0, n - 1)),
                                               static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(last, 1, n)));
  };
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& v : facets_[f].polygon) {
      x0 = std::min(x0, v[0]);
      x1 = std::max(x1, v[0]);
      y0 = std::min(y0, v[1]);
      y1 = std::max(y1, v[1]);
    }
    const auto [i0, i1] = cell_range(xs_, x0, x1);
    const auto [j0, j1] = cell_range(ys_, y0, y1);
    for (std::size_t j = j0; j < j1; ++j)
      for (std::size_t i = i0; i < i1; ++i) cells_[j * cx + i].push_back(f);
  }
}

const Facet& PiecewiseLinearConvex2d::active(double x, double y) const {
  const bool inside = x >= xs_.front() && x <= xs_.back() && y >= ys_.front() && y <= ys_.back();
  const Facet* best = nullptr;
  double value = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Facet& f) {
    const double v = f.plane(x, y);
    if (v > value) {
      value = v;
      best = &f;
    }
  };
  if (inside) {
    const std::size_t cx = xs_.size() - 1;
    const auto i = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin()) - 1, cx - 1);
    const auto j = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(ys_.begin(), ys_.end(), y) - ys_.begin()) - 1,
        ys_.size() - 2);
    for (std::size_t f : cells_[j * cx + i]) consider(facets_[f]);
  } else {
    for (const auto& f : facets_) consider(f);
  }
  return *best;
}

double PiecewiseLinearConvex2d::operator()(double x, double y) const { return active(x, y).plane(x, y); }

std::array<double, 2> PiecewiseLinearConvex2d::subgradient(double x, double y) const {
  const Plane& p = active(x, y).plane;
  return {p.a, p.b};
}

CsvTable PiecewiseLinearConvex2d::to_csv() const {
  CsvTable t({"facet", "x", "y", "value"});
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    for (const auto& v : facets_[f].polygon) t.add_row({static_cast<long long>(f), v[0], v[1], v[2]});
  }
  return t;
}

PiecewiseLinearConvex envelope_nd(const std::vector<std::vector<double>>& axes, std::span<const double> values) {
  if (axes.empty()) throw InputError("envelope: no axes");
  if (axes.size() > 2) throw UnsupportedError("envelope: dimension > 2 is not supported");
  std::size_t nodes = 1;
  for (const auto& a : axes) nodes *= a.size();
  if (values.size() != nodes) throw InputError("envelope: values do not match the grid");
  if (axes.size() == 1) return lower_convex_envelope_1d(axes[0], values);
  check_axis(axes[0]);
  check_axis(axes[1]);
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("envelope: non-finite sample");
  }
  LowerHull2d hull(axes[0], axes[1], values);
  return PiecewiseLinearConvex2d(hull.build(), axes[0], axes[1]);
}

}  // namespace sdecmp
