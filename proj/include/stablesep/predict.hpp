#pragma once

#include "stablesep/dataset.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace stablesep {

inline constexpr double kMaxConditionNumber = 1e10;
inline constexpr double kRidgeFallback = 1e-8;

/// Least-squares fit with intercept on centered data.
struct LeastSquaresSolution {
  Eigen::VectorXd slopes;
  double intercept = 0.0;
  // diag((X_c' X_c)^-1), used for coefficient standard errors.
  Eigen::VectorXd inverse_gram_diagonal;
  double residual_variance = 0.0;  // RSS / (n - cols - 1)
  bool ridge = false;
};

/// Solve y ~ 1 + X. Refits with a small ridge when the centered normal system
/// is ill-conditioned; throws SingularDesign if that still fails.
LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  std::vector<std::size_t> column_indices;
  bool ridge = false;

  Eigen::VectorXd predict(const Dataset& d) const;
};

LinearModel ols_fit(const Dataset& d, std::span<const std::size_t> idx);

double rmse(const LinearModel& m, const Dataset& d);

}  // namespace stablesep
