#include <algorithm>
#include <cmath>
#include <memory>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"
#include "sdecmp/core/rng.hpp"
#include "sdecmp/drift_analysis/envelope.hpp"

namespace sdecmp {

namespace {

bool convex_quadratic(const PolynomialDrift& p) {
  for (const auto& c : p.coefficients) {
    for (std::size_t k = 3; k < c.size(); ++k) {
      if (c[k] != 0.0) return false;
    }
    if (c.size() > 2 && c[2] < 0.0) return false;
  }
  return true;
}

bool passes_through(const DriftSpec& spec) {
  if (std::holds_alternative<ConstantDrift>(spec.kind) || std::holds_alternative<LinearDrift>(spec.kind)) {
    return true;
  }
  if (const auto* p = std::get_if<PolynomialDrift>(&spec.kind)) return convex_quadratic(*p);
  return false;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = k + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace

EnvelopeDrift envelope_drift(const DriftSpec& spec, const Box& box, std::size_t resolution,
                             std::span<const double> x0) {
  spec.validate();
  const std::size_t n = spec.dim();
  if (box.dim() != n) throw ConfigError("envelope: box dimension does not match the drift");
  if (!box.contains(x0)) throw ConfigError("envelope: box does not contain x0");
  if (resolution < 2) throw ConfigError("envelope: resolution must be at least 2");

  if (passes_through(spec)) {
    return {build_drift(spec), {}, true, resolution};
  }

  DriftTraits traits;
  traits.label = "envelope(" + spec.describe() + ")";
  traits.lipschitz = true;

  if (spec.componentwise()) {
    auto comps = std::make_shared<std::vector<PiecewiseLinearConvex1d>>();
    std::vector<PiecewiseLinearConvex> components;
    for (std::size_t i = 0; i < n; ++i) {
      const auto profile = spec.component_profile(i);
      const auto xs = linspace(box.bounds[i].first, box.bounds[i].second, resolution);
      std::vector<double> hs(xs.size());
      std::transform(xs.begin(), xs.end(), hs.begin(), profile);
      comps->push_back(lower_convex_envelope_1d(xs, hs));
      components.emplace_back(comps->back());
    }
    DriftFn fn(n, [comps](std::span<const double> x, std::span<double> out) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*comps)[i](x[i]);
    }, traits);
    return {std::move(fn), std::move(components), false, resolution};
  }

  if (n != 2) throw UnsupportedError("envelope: non-componentwise drifts need dimension <= 2");
  const std::size_t res = std::clamp<std::size_t>(resolution, 3, kMaxEnvelopeResolution2d);
  const std::vector<std::vector<double>> axes{linspace(box.bounds[0].first, box.bounds[0].second, res),
                                              linspace(box.bounds[1].first, box.bounds[1].second, res)};
  const DriftFn b = build_drift(spec);
  std::vector<std::vector<double>> values(2, std::vector<double>(res * res));
  std::vector<double> point(2), out(2);
  for (std::size_t j = 0; j < res; ++j) {
    for (std::size_t i = 0; i < res; ++i) {
      point = {axes[0][i], axes[1][j]};
      b(point, out);
      values[0][j * res + i] = out[0];
      values[1][j * res + i] = out[1];
    }
  }
  auto comps = std::make_shared<std::vector<PiecewiseLinearConvex>>();
  for (std::size_t c = 0; c < 2; ++c) comps->push_back(envelope_nd(axes, values[c]));
  std::vector<PiecewiseLinearConvex> components(comps->begin(), comps->end());
  DriftFn fn(2, [comps](std::span<const double> x, std::span<double> out) {
    out[0] = (*comps)[0](x);
    out[1] = (*comps)[1](x);
  }, traits);
  return {std::move(fn), std::move(components), false, res};
}

QuasiMonotoneReport is_quasi_monotone(const DriftFn& f, const Box& box, std::size_t n_probes, double tol,
                                      std::uint64_t seed, std::size_t workers) {
  if (n_probes == 0) throw ConfigError("quasi-monotone: n_probes must be positive");
  const std::size_t n = f.dim();
  if (box.dim() != n) throw ConfigError("quasi-monotone: box dimension does not match the drift");
  QuasiMonotoneReport report;
  report.tolerance = tol;
  if (n == 1) {
    report.certified = true;
    return report;
  }

  std::vector<double> center(n), lo(n), hi(n);
  for (std::size_t j = 0; j < n; ++j) {
    lo[j] = box.bounds[j].first;
    hi[j] = box.bounds[j].second;
    center[j] = 0.5 * (lo[j] + hi[j]);
  }

  if (const auto& lin = f.traits().linear) {
    report.certified = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double a = lin->matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (i == j || a >= 0.0) continue;
        QuasiMonotoneWitness w;
        w.x = center;
        w.y = center;
        w.x[j] = lo[j];
        w.y[j] = hi[j];
        w.coordinate = i;
        w.fx = f(w.x)[i];
        w.fy = f(w.y)[i];
        report.pass = false;
        report.witness = w;
        return report;
      }
    }
    return report;
  }

  // Probe pairs x <= y off coordinate i with x_i = y_i. Even probes move one
  // coordinate, odd probes move all of them.
  constexpr std::size_t kChunk = 256;
  const std::size_t n_chunks = (n_probes + kChunk - 1) / kChunk;
  std::vector<std::optional<QuasiMonotoneWitness>> found(n_chunks);
  for_each_chunk(n_probes, kChunk, workers, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    Philox4x32 rng(derive_seed(seed, 0x9a51), chunk);
    std::vector<double> x(n), y(n), fx(n), fy(n);
    for (std::size_t probe = begin; probe < end; ++probe) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      for (std::size_t j = 0; j < n; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform01();
      y = x;
      if (probe % 2 == 0) {
        std::size_t j = static_cast<std::size_t>(rng.below(n - 1));
        if (j >= i) ++j;
        y[j] = x[j] + (hi[j] - x[j]) * rng.uniform01();
      } else {
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) y[j] = x[j] + (hi[j] - x[j]) * rng.uniform01();
        }
      }
      f(x, fx);
      f(y, fy);
      if (fx[i] > fy[i] + tol) {
        found[chunk] = QuasiMonotoneWitness{x, y, i, fx[i], fy[i]};
        return;
      }
    }
  });
  report.n_probes = n_probes;
  for (auto& w : found) {
    if (w) {
      report.pass = false;
      report.witness = std::move(w);
      break;
    }
  }
  return report;
}

}  // namespace sdecmp
