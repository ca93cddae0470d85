#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sdecmp/core/paths.hpp"
#include "sdecmp/core/test_function.hpp"
#include "sdecmp/core/time_grid.hpp"

namespace sdecmp {

/// Scalar maps phi: R -> R used in cylinder functionals and Jensen checks.
class ScalarMap {
 public:
  enum class Kind { identity, square, abs, sin, cos, tanh, logistic, exp, affine };

  static ScalarMap identity() { return ScalarMap(Kind::identity); }
  static ScalarMap square() { return ScalarMap(Kind::square); }
  static ScalarMap absolute() { return ScalarMap(Kind::abs); }
  static ScalarMap sine() { return ScalarMap(Kind::sin); }
  static ScalarMap cosine() { return ScalarMap(Kind::cos); }
  static ScalarMap hyperbolic_tangent() { return ScalarMap(Kind::tanh); }
  static ScalarMap logistic() { return ScalarMap(Kind::logistic); }
  static ScalarMap exponential() { return ScalarMap(Kind::exp); }
  /// u -> a u + b
  static ScalarMap affine(double a, double b) { return ScalarMap(Kind::affine, a, b); }
  static ScalarMap parse(const std::string& name);

  double operator()(double u) const;
  Kind kind() const { return kind_; }
  bool bounded() const;
  bool nonnegative() const;
  bool convex() const;
  std::string name() const;

 private:
  explicit ScalarMap(Kind kind, double a = 1.0, double b = 0.0) : kind_(kind), a_(a), b_(b) {}

  Kind kind_;
  double a_, b_;
};

/// Closed-form path functionals X(omega): cylinder functions of knot values,
/// stochastic exponentials of deterministic f, and sums/products of these.
/// Times are resolved against the path grid at evaluation and must be knots.
class PathFunctional {
 public:
  static PathFunctional constant(double c);
  /// omega_i(t), the path value including its origin.
  static PathFunctional coordinate(double t, std::size_t i);
  /// phi(omega_i(t)).
  static PathFunctional cylinder(ScalarMap phi, double t, std::size_t i);
  /// E_t(f) computed from the path's own increments; t < 0 means the horizon.
  static PathFunctional exponential(TestFunction f, double t = -1.0);

  PathFunctional operator+(const PathFunctional& other) const;
  PathFunctional operator*(const PathFunctional& other) const;
  PathFunctional scaled(double c) const;
  /// phi(X).
  PathFunctional mapped(ScalarMap phi) const;

  double evaluate(const PathView& path, const TimeGrid& grid) const;

  bool bounded() const;
  bool nonnegative() const;
  std::string describe() const;

 private:
  struct Constant { double c; };
  struct Coordinate { double t; std::size_t i; };
  struct Cylinder { ScalarMap phi; double t; std::size_t i; };
  struct Exponential { TestFunction f; double t; };
  struct Sum { std::shared_ptr<const PathFunctional> a, b; };
  struct Product { std::shared_ptr<const PathFunctional> a, b; };
  struct Scaled { std::shared_ptr<const PathFunctional> a; double c; };
  struct Mapped { std::shared_ptr<const PathFunctional> a; ScalarMap phi; };
  using Node = std::variant<Constant, Coordinate, Cylinder, Exponential, Sum, Product, Scaled, Mapped>;

  explicit PathFunctional(Node node) : node_(std::move(node)) {}

  Node node_;
};

}  // namespace sdecmp
