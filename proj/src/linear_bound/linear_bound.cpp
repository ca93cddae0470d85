#include "sdecmp/linear_bound/linear_bound.hpp"

#include <algorithm>

#include <unsupported/Eigen/MatrixFunctions>

#include "sdecmp/core/errors.hpp"
#include "sdecmp/core/parallel.hpp"

namespace sdecmp {

LinearDriftParams LinearDriftParams::from(Eigen::MatrixXd matrix, Eigen::VectorXd offset) {
  if (matrix.rows() != matrix.cols()) throw InputError("linear drift: matrix must be square");
  if (offset.size() != matrix.rows()) throw InputError("linear drift: offset has wrong length");
  LinearDriftParams p{std::move(matrix), std::move(offset), true};
  for (Eigen::Index i = 0; i < p.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < p.matrix.cols(); ++j)
      if (i != j && p.matrix(i, j) < 0.0) p.off_diagonal_nonneg = false;
  return p;
}

LinearDriftParams LinearDriftParams::from(const LinearDrift& drift) {
  return from(drift.matrix, drift.offset);
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A, double t) {
  if (A.rows() != A.cols()) throw InputError("matrix exponential: matrix must be square");
  const Eigen::MatrixXd tA = t * A;
  return tA.exp();
}

FundamentalMatrixSeries fundamental_matrix(const Eigen::MatrixXd& A, const TimeGrid& grid) {
  FundamentalMatrixSeries s{grid, {}, {}};
  s.phi.reserve(grid.n_knots());
  s.phi_inv.reserve(grid.n_knots());
  for (std::size_t k = 0; k < grid.n_knots(); ++k) {
    s.phi.push_back(matrix_exponential(A, grid.time(k)));
    s.phi_inv.push_back(matrix_exponential(A, -grid.time(k)));
  }
  return s;
}

double matrix_ode_check(const Eigen::MatrixXd& A, const TimeGrid& grid) {
  const FundamentalMatrixSeries series = fundamental_matrix(A, grid);
  const double h = grid.dt();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  double worst = (phi - series.phi[0]).cwiseAbs().maxCoeff();
  for (std::size_t k = 1; k < grid.n_knots(); ++k) {
    const Eigen::MatrixXd k1 = A * phi;
    const Eigen::MatrixXd k2 = A * (phi + 0.5 * h * k1);
    const Eigen::MatrixXd k3 = A * (phi + 0.5 * h * k2);
    const Eigen::MatrixXd k4 = A * (phi + h * k3);
    phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    worst = std::max(worst, (phi - series.phi[k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

PathBatch linear_solution_path(const LinearDriftParams& params, std::span<const double> x0,
                               const IncrementBatch& inc, std::size_t workers) {
  const std::size_t dim = params.dim();
  if (x0.size() != dim || inc.dim() != dim) throw InputError("linear path: dimension mismatch");
  const TimeGrid& grid = inc.grid();
  const std::size_t knots = grid.n_knots();
  const FundamentalMatrixSeries series = fundamental_matrix(params.matrix, grid);

  // Deterministic part x0 + sum_{j<k} Phi^{-1}(t_j) offset dt, shared by all paths.
  std::vector<Eigen::VectorXd> base(knots);
  base[0] = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(dim));
  for (std::size_t k = 1; k < knots; ++k) {
    base[k] = base[k - 1] + series.phi_inv[k - 1] * params.offset * grid.dt();
  }

  std::vector<double> values(checked_storage(inc.n_paths(), knots * dim));
  for_each_chunk(inc.n_paths(), inc.chunk_size(), workers,
                 [&](std::size_t begin, std::size_t end, std::size_t) {
                   Eigen::VectorXd noise(static_cast<Eigen::Index>(dim));
                   for (std::size_t p = begin; p < end; ++p) {
                     noise.setZero();
                     double* out = values.data() + p * knots * dim;
                     for (std::size_t k = 0; k < knots; ++k) {
                       if (k > 0) {
                         const auto dB = inc.step(p, k - 1);
                         noise += series.phi_inv[k - 1] *
                                  Eigen::Map<const Eigen::VectorXd>(dB.data(), static_cast<Eigen::Index>(dim));
                       }
                       const Eigen::VectorXd x = series.phi[k] * (base[k] + noise);
                       std::copy(x.data(), x.data() + dim, out + k * dim);
                     }
                   }
                 });
  return PathBatch(grid, inc.n_paths(), dim, std::vector<double>(x0.begin(), x0.end()),
                   std::move(values), std::vector<PathState>(inc.n_paths()));
}

Eigen::VectorXd linear_mean(const LinearDriftParams& params, std::span<const double> x0, double t) {
  const auto n = static_cast<Eigen::Index>(params.dim());
  if (static_cast<Eigen::Index>(x0.size()) != n) throw InputError("linear mean: dimension mismatch");
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = params.matrix;
  aug.topRightCorner(n, 1) = params.offset;
  Eigen::VectorXd start(n + 1);
  start.head(n) = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  start(n) = 1.0;
  return (matrix_exponential(aug, t) * start).head(n);
}

}  // namespace sdecmp
