#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sdecmp {

struct ConstantDrift {
  std::vector<double> value;
};

/// b(x) = A x + offset.
struct LinearDrift {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
};

enum class BoundedShape { tanh, sine, shifted_sine };

/// b_i(x) = shift + amplitude * g(frequency * x_i) for g in {tanh, sin}.
/// `shift` is only used by shifted_sine.
struct BoundedDrift {
  BoundedShape shape = BoundedShape::tanh;
  std::size_t dim = 1;
  double amplitude = 1.0;
  double frequency = 1.0;
  double shift = 0.0;
};

/// b_i(x) = sum_k coefficients[i][k] * x_i^k.
struct PolynomialDrift {
  std::vector<std::vector<double>> coefficients;
};

/// Values sampled on a tensor grid; multilinear inside the box, clamped to
/// the boundary value outside. Values are node-major: node index runs over
/// axes with the last axis fastest, then `dim` components per node.
struct GridDrift {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;
};

using DriftKind = std::variant<ConstantDrift, LinearDrift, BoundedDrift, PolynomialDrift, GridDrift>;

/// Declarative drift description.
struct DriftSpec {
  DriftKind kind;

  std::size_t dim() const;
  /// Bound on the Euclidean norm of b over R^n, when the kind has one.
  std::optional<double> sup_bound() const;
  /// True when b_i depends on x_i only.
  bool componentwise() const;
  /// Globally Lipschitz kinds (the regime where a strong solution exists).
  bool lipschitz() const;
  /// Scalar profile u -> b_i(u e_i) for componentwise kinds.
  std::function<double(double)> component_profile(std::size_t i) const;
  std::string describe() const;

  /// Throws ConfigError when parameters are inconsistent.
  void validate() const;
};

struct DriftTraits {
  std::string label;
  bool lipschitz = false;
  std::optional<double> sup_bound;
  std::optional<LinearDrift> linear;
};

/// Evaluable drift b: R^n -> R^n.
class DriftFn {
 public:
  using Kernel = std::function<void(std::span<const double>, std::span<double>)>;

  DriftFn(std::size_t dim, Kernel kernel, DriftTraits traits = {});

  std::size_t dim() const { return dim_; }
  const DriftTraits& traits() const { return traits_; }

  void operator()(std::span<const double> x, std::span<double> out) const { kernel_(x, out); }
  std::vector<double> operator()(std::span<const double> x) const;

 private:
  std::size_t dim_;
  Kernel kernel_;
  DriftTraits traits_;
};

DriftFn build_drift(const DriftSpec& spec);

/// The zero drift in dimension n.
DriftFn zero_drift(std::size_t dim);

}  // namespace sdecmp
