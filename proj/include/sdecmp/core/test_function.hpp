#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace sdecmp {

struct ConstantTest {
  std::vector<double> value;
};

/// values[j] on [breakpoints[j-1], breakpoints[j]); breakpoints increasing.
struct PiecewiseConstantTest {
  std::vector<double> breakpoints;
  std::vector<std::vector<double>> values;
};

/// f(t) = mean + sum_k cos_terms[k] cos(2 pi (k+1) t / period)
///             + sin_terms[k] sin(2 pi (k+1) t / period).
struct FourierTest {
  double period = 1.0;
  std::vector<double> mean;
  std::vector<std::vector<double>> cos_terms;
  std::vector<std::vector<double>> sin_terms;
};

/// Deterministic bounded f: [0, T] -> R^n, the integrand of E(f).
class TestFunction {
 public:
  using Kind = std::variant<ConstantTest, PiecewiseConstantTest, FourierTest>;

  explicit TestFunction(Kind kind);

  std::size_t dim() const { return dim_; }
  const Kind& kind() const { return kind_; }

  void evaluate(double t, std::span<double> out) const;
  std::vector<double> operator()(double t) const;
  /// Upper bound on the Euclidean norm of f over [0, T].
  double sup_bound() const;

 private:
  Kind kind_;
  std::size_t dim_;
};

}  // namespace sdecmp
