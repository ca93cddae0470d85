#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sdecmp/core/drift.hpp"
#include "sdecmp/core/increments.hpp"
#include "sdecmp/core/paths.hpp"
#include "sdecmp/core/time_grid.hpp"

namespace sdecmp {

/// The lower-bound drift x -> A x + offset. `offset` is a vector, distinct
/// from the nonlinear drift it bounds.
struct LinearDriftParams {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
  bool off_diagonal_nonneg = false;

  static LinearDriftParams from(Eigen::MatrixXd matrix, Eigen::VectorXd offset);
  static LinearDriftParams from(const LinearDrift& drift);
  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Phi(t_k) = exp(t_k A) and its inverse exp(-t_k A) at every knot.
struct FundamentalMatrixSeries {
  TimeGrid grid;
  std::vector<Eigen::MatrixXd> phi;
  std::vector<Eigen::MatrixXd> phi_inv;
};

FundamentalMatrixSeries fundamental_matrix(const Eigen::MatrixXd& A, const TimeGrid& grid);

/// exp(tA) by scaling and squaring.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A, double t);

/// Max entrywise deviation between RK4 integration of Phi' = A Phi on the
/// grid and fundamental_matrix.
double matrix_ode_check(const Eigen::MatrixXd& A, const TimeGrid& grid);

/// X_k = Phi(t_k) (x0 + sum_{j<k} Phi^{-1}(t_j) offset dt + sum_{j<k} Phi^{-1}(t_j) dB_j).
PathBatch linear_solution_path(const LinearDriftParams& params, std::span<const double> x0,
                               const IncrementBatch& inc, std::size_t workers = 1);

/// E X_t = Phi(t) x0 + int_0^t Phi(t - s) offset ds, via exp of the
/// augmented matrix [[A, offset], [0, 0]].
Eigen::VectorXd linear_mean(const LinearDriftParams& params, std::span<const double> x0, double t);

}  // namespace sdecmp
