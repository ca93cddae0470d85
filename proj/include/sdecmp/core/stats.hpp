#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sdecmp {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// Mean and standard error of the mean of a sample.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};
MeanSe mean_se(std::span<const double> xs);

/// Ratio estimator sum(y)/sum(w) with delta-method standard error.
MeanSe ratio_mean_se(std::span<const double> ys, std::span<const double> ws);

/// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> ws);

double log_sum_exp(std::span<const double> xs);

/// Linear-interpolated empirical quantile of an unsorted sample (p in [0,1]).
double quantile(std::vector<double> xs, double p);

/// Two-sided standard normal critical value for a confidence level.
double normal_critical(double confidence);

}  // namespace sdecmp
