#include "sdecmp/core/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "sdecmp/core/errors.hpp"

namespace sdecmp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

double bounded_profile(const BoundedDrift& d, double u) {
  switch (d.shape) {
    case BoundedShape::tanh:
      return d.amplitude * std::tanh(d.frequency * u);
    case BoundedShape::sine:
      return d.amplitude * std::sin(d.frequency * u);
    case BoundedShape::shifted_sine:
      return d.shift + d.amplitude * std::sin(d.frequency * u);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool is_diagonal(const Eigen::MatrixXd& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

std::size_t polynomial_degree(const PolynomialDrift& p) {
  std::size_t degree = 0;
  for (const auto& c : p.coefficients) {
    for (std::size_t k = c.size(); k-- > 0;) {
      if (c[k] != 0.0) {
        degree = std::max(degree, k);
        break;
      }
    }
  }
  return degree;
}

/// Multilinear interpolation on a tensor grid, clamped outside.
class GridInterpolator {
 public:
  explicit GridInterpolator(const GridDrift& g) : axes_(g.axes), values_(g.values) {
    dim_ = axes_.size();
    strides_.assign(dim_, 1);
    for (std::size_t a = dim_; a-- > 1;) strides_[a - 1] = strides_[a] * axes_[a].size();
  }

  void operator()(std::span<const double> x, std::span<double> out) const {
    std::vector<std::size_t> base(dim_);
    std::vector<double> frac(dim_);
    for (std::size_t a = 0; a < dim_; ++a) {
      if (std::isnan(x[a])) {
        std::fill(out.begin(), out.end(), std::numeric_limits<double>::quiet_NaN());
        return;
      }
      const auto& axis = axes_[a];
      if (x[a] <= axis.front()) {
        base[a] = 0;
        frac[a] = 0.0;
      } else if (x[a] >= axis.back()) {
        base[a] = axis.size() - 2;
        frac[a] = 1.0;
      } else {
        const auto it = std::upper_bound(axis.begin(), axis.end(), x[a]);
        base[a] = static_cast<std::size_t>(it - axis.begin()) - 1;
        frac[a] = (x[a] - axis[base[a]]) / (axis[base[a] + 1] - axis[base[a]]);
      }
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t corner = 0; corner < (std::size_t{1} << dim_); ++corner) {
      double w = 1.0;
      std::size_t node = 0;
      for (std::size_t a = 0; a < dim_; ++a) {
        const bool up = (corner >> a) & 1U;
        w *= up ? frac[a] : 1.0 - frac[a];
        node += (base[a] + (up ? 1 : 0)) * strides_[a];
      }
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < dim_; ++i) out[i] += w * values_[node * dim_ + i];
    }
  }

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
  std::size_t dim_ = 0;
};

}  // namespace

std::size_t DriftSpec::dim() const {
  return std::visit(Overloaded{
                        [](const ConstantDrift& d) { return d.value.size(); },
                        [](const LinearDrift& d) { return static_cast<std::size_t>(d.matrix.rows()); },
                        [](const BoundedDrift& d) { return d.dim; },
                        [](const PolynomialDrift& d) { return d.coefficients.size(); },
                        [](const GridDrift& d) { return d.axes.size(); },
                    },
                    kind);
}

void DriftSpec::validate() const {
  std::visit(
      Overloaded{
          [](const ConstantDrift& d) {
            if (d.value.empty()) throw ConfigError("constant drift: empty value");
            if (!all_finite(d.value)) throw ConfigError("constant drift: non-finite value");
          },
          [](const LinearDrift& d) {
            if (d.matrix.rows() == 0 || d.matrix.rows() != d.matrix.cols()) {
              throw ConfigError("linear drift: matrix must be square and non-empty");
            }
            if (d.offset.size() != d.matrix.rows()) {
              throw ConfigError("linear drift: offset dimension does not match matrix");
            }
            if (!d.matrix.allFinite() || !d.offset.allFinite()) {
              throw ConfigError("linear drift: non-finite coefficients");
            }
          },
          [](const BoundedDrift& d) {
            if (d.dim == 0) throw ConfigError("bounded drift: dim must be positive");
            if (!std::isfinite(d.amplitude) || !std::isfinite(d.frequency) ||
                !std::isfinite(d.shift)) {
              throw ConfigError("bounded drift: non-finite parameter");
            }
          },
          [](const PolynomialDrift& d) {
            if (d.coefficients.empty()) throw ConfigError("polynomial drift: no components");
            for (const auto& c : d.coefficients) {
              if (c.empty()) throw ConfigError("polynomial drift: empty coefficient list");
              if (!all_finite(c)) throw ConfigError("polynomial drift: non-finite coefficient");
            }
          },
          [](const GridDrift& d) {
            if (d.axes.empty()) throw ConfigError("grid drift: no axes");
            std::size_t nodes = 1;
            for (const auto& axis : d.axes) {
              if (axis.size() < 2) throw ConfigError("grid drift: each axis needs >= 2 points");
              for (std::size_t j = 1; j < axis.size(); ++j) {
                if (!(axis[j] > axis[j - 1])) {
                  throw ConfigError("malformed grid table: axes must be strictly increasing");
                }
              }
              nodes *= axis.size();
            }
            if (d.values.size() != nodes * d.axes.size()) {
              throw ConfigError("grid drift: expected " + std::to_string(nodes * d.axes.size()) +
                                " values, got " + std::to_string(d.values.size()));
            }
            if (!all_finite(d.values)) throw ConfigError("grid drift: non-finite value");
          },
      },
      kind);
}

std::optional<double> DriftSpec::sup_bound() const {
  return std::visit(
      Overloaded{
          [](const ConstantDrift& d) -> std::optional<double> {
            double s = 0.0;
            for (double v : d.value) s += v * v;
            return std::sqrt(s);
          },
          [](const LinearDrift& d) -> std::optional<double> {
            if (!d.matrix.isZero(0.0)) return std::nullopt;
            return d.offset.norm();
          },
          [](const BoundedDrift& d) -> std::optional<double> {
            const double per = std::abs(d.amplitude) +
                               (d.shape == BoundedShape::shifted_sine ? std::abs(d.shift) : 0.0);
            return std::sqrt(static_cast<double>(d.dim)) * per;
          },
          [](const PolynomialDrift& d) -> std::optional<double> {
            if (polynomial_degree(d) > 0) return std::nullopt;
            double s = 0.0;
            for (const auto& c : d.coefficients) s += c[0] * c[0];
            return std::sqrt(s);
          },
          [](const GridDrift& d) -> std::optional<double> {
            const std::size_t n = d.axes.size();
            std::vector<double> m(n, 0.0);
            for (std::size_t j = 0; j < d.values.size(); ++j) {
              m[j % n] = std::max(m[j % n], std::abs(d.values[j]));
            }
            double s = 0.0;
            for (double v : m) s += v * v;
            return std::sqrt(s);
          },
      },
      kind);
}

bool DriftSpec::componentwise() const {
  return std::visit(Overloaded{
                        [](const ConstantDrift&) { return true; },
                        [](const LinearDrift& d) { return is_diagonal(d.matrix); },
                        [](const BoundedDrift&) { return true; },
                        [](const PolynomialDrift&) { return true; },
                        [](const GridDrift& d) { return d.axes.size() == 1; },
                    },
                    kind);
}

bool DriftSpec::lipschitz() const {
  if (const auto* p = std::get_if<PolynomialDrift>(&kind)) return polynomial_degree(*p) <= 1;
  return true;
}

std::function<double(double)> DriftSpec::component_profile(std::size_t i) const {
  if (!componentwise()) throw UnsupportedError("component_profile: drift is not componentwise");
  if (i >= dim()) throw InputError("component_profile: component out of range");
  return std::visit(
      Overloaded{
          [i](const ConstantDrift& d) -> std::function<double(double)> {
            const double c = d.value[i];
            return [c](double) { return c; };
          },
          [i](const LinearDrift& d) -> std::function<double(double)> {
            const double a = d.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
            const double b = d.offset(static_cast<Eigen::Index>(i));
            return [a, b](double u) { return a * u + b; };
          },
          [](const BoundedDrift& d) -> std::function<double(double)> {
            return [d](double u) { return bounded_profile(d, u); };
          },
          [i](const PolynomialDrift& d) -> std::function<double(double)> {
            return [c = d.coefficients[i]](double u) { return horner(c, u); };
          },
          [](const GridDrift& d) -> std::function<double(double)> {
            auto interp = std::make_shared<GridInterpolator>(d);
            return [interp](double u) {
              double out = 0.0;
              (*interp)(std::span<const double>(&u, 1), std::span<double>(&out, 1));
              return out;
            };
          },
      },
      kind);
}

std::string DriftSpec::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const ConstantDrift& d) { os << "constant(dim=" << d.value.size() << ")"; },
                 [&](const LinearDrift& d) { os << "linear(dim=" << d.matrix.rows() << ")"; },
                 [&](const BoundedDrift& d) {
                   const char* name = d.shape == BoundedShape::tanh   ? "tanh"
                                      : d.shape == BoundedShape::sine ? "sine"
                                                                      : "shifted_sine";
                   os << name << "(dim=" << d.dim << ", amplitude=" << d.amplitude
                      << ", frequency=" << d.frequency << ", shift=" << d.shift << ")";
                 },
                 [&](const PolynomialDrift& d) {
                   os << "polynomial(dim=" << d.coefficients.size()
                      << ", degree=" << polynomial_degree(d) << ")";
                 },
                 [&](const GridDrift& d) { os << "grid(dim=" << d.axes.size() << ")"; },
             },
             kind);
  return os.str();
}

DriftFn::DriftFn(std::size_t dim, Kernel kernel, DriftTraits traits)
    : dim_(dim), kernel_(std::move(kernel)), traits_(std::move(traits)) {
  if (dim_ == 0) throw ConfigError("drift: dimension must be positive");
}

std::vector<double> DriftFn::operator()(std::span<const double> x) const {
  std::vector<double> out(dim_);
  kernel_(x, out);
  return out;
}

DriftFn build_drift(const DriftSpec& spec) {
  spec.validate();
  DriftTraits traits;
  traits.label = spec.describe();
  traits.lipschitz = spec.lipschitz();
  traits.sup_bound = spec.sup_bound();
  const std::size_t n = spec.dim();

  DriftFn::Kernel kernel = std::visit(
      Overloaded{
          [](const ConstantDrift& d) -> DriftFn::Kernel {
            return [c = d.value](std::span<const double>, std::span<double> out) {
              std::copy(c.begin(), c.end(), out.begin());
            };
          },
          [&traits](const LinearDrift& d) -> DriftFn::Kernel {
            traits.linear = d;
            return [a = d.matrix, b = d.offset](std::span<const double> x, std::span<double> out) {
              const auto n = static_cast<Eigen::Index>(x.size());
              Eigen::Map<Eigen::VectorXd>(out.data(), n).noalias() =
                  a * Eigen::Map<const Eigen::VectorXd>(x.data(), n) + b;
            };
          },
          [](const BoundedDrift& d) -> DriftFn::Kernel {
            return [d](std::span<const double> x, std::span<double> out) {
              for (std::size_t i = 0; i < x.size(); ++i) out[i] = bounded_profile(d, x[i]);
            };
          },
          [&traits](const PolynomialDrift& d) -> DriftFn::Kernel {
            if (polynomial_degree(d) <= 1) {
              // affine and diagonal
              const auto n = static_cast<Eigen::Index>(d.coefficients.size());
              LinearDrift lin{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
              for (Eigen::Index i = 0; i < n; ++i) {
                const auto& c = d.coefficients[static_cast<std::size_t>(i)];
                lin.offset(i) = c[0];
                lin.matrix(i, i) = c.size() > 1 ? c[1] : 0.0;
              }
              traits.linear = lin;
            }
            return [c = d.coefficients](std::span<const double> x, std::span<double> out) {
              for (std::size_t i = 0; i < x.size(); ++i) out[i] = horner(c[i], x[i]);
            };
          },
          [](const GridDrift& d) -> DriftFn::Kernel {
            auto interp = std::make_shared<GridInterpolator>(d);
            return [interp](std::span<const double> x, std::span<double> out) {
              (*interp)(x, out);
            };
          },
      },
      spec.kind);
  if (const auto* c = std::get_if<ConstantDrift>(&spec.kind)) {
    const auto m = static_cast<Eigen::Index>(n);
    traits.linear = LinearDrift{Eigen::MatrixXd::Zero(m, m),
                                Eigen::Map<const Eigen::VectorXd>(c->value.data(), m)};
  }
  return DriftFn(n, std::move(kernel), std::move(traits));
}

DriftFn zero_drift(std::size_t dim) {
  return build_drift(DriftSpec{ConstantDrift{std::vector<double>(dim, 0.0)}});
}

}  // namespace sdecmp
