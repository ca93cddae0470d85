#include "sdecmp/core/stats.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace sdecmp {

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.n = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = compensated_sum(xs) / n;
  if (xs.size() < 2) return out;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - out.mean) * (x - out.mean));
  out.se = std::sqrt(ss.value() / (n - 1.0) / n);
  return out;
}

MeanSe ratio_mean_se(std::span<const double> ys, std::span<const double> ws) {
  if (ys.size() != ws.size()) throw std::invalid_argument("ratio_mean_se: size mismatch");
  MeanSe out;
  out.n = ys.size();
  if (ys.empty()) return out;
  const double n = static_cast<double>(ys.size());
  const double wbar = compensated_sum(ws) / n;
  out.mean = compensated_sum(ys) / n / wbar;
  if (ys.size() < 2) return out;
  CompensatedSum ss;
  for (std::size_t p = 0; p < ys.size(); ++p) {
    const double r = ys[p] - out.mean * ws[p];
    ss.add(r * r);
  }
  out.se = std::sqrt(ss.value() / (n - 1.0) / n) / wbar;
  return out;
}

double effective_sample_size(std::span<const double> ws) {
  CompensatedSum s, s2;
  for (double w : ws) {
    s.add(w);
    s2.add(w * w);
  }
  if (s2.value() <= 0.0) return 0.0;
  return s.value() * s.value() / s2.value();
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  CompensatedSum s;
  for (double x : xs) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

double normal_critical(double confidence) {
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + 0.5 * std::clamp(confidence, 0.0, 1.0 - 1e-15));
}

}  // namespace sdecmp
