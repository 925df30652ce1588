#include "stablesep/predict.hpp"

#include "stablesep/error.hpp"

#include <cmath>

namespace stablesep {

LeastSquaresSolution solve_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.rows(), k = x.cols();
  if (y.size() != n) throw Error(ErrorKind::InvalidArgument, "design/response length mismatch");
  if (n <= k + 1) {
    throw Error(ErrorKind::InvalidArgument, "need more rows than columns + 1 (" + std::to_string(n) +
                                                " rows, " + std::to_string(k) + " columns)");
  }
  LeastSquaresSolution out;
  const double dn = static_cast<double>(n);
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  if (k == 0) {
    out.intercept = y_mean;
    out.residual_variance = (y.array() - y_mean).square().sum() / (dn - 1.0);
    return out;
  }
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  // Gram matrix on the covariance scale so the ridge is scale-free.
  Eigen::MatrixXd gram = xc.transpose() * xc / dn;
  const Eigen::VectorXd xty = xc.transpose() * yc / dn;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    gram.diagonal().array() += kRidgeFallback;
    out.ridge = true;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularDesign, "normal system not positive definite");
  out.slopes = llt.solve(xty);
  if (!out.slopes.allFinite()) throw Error(ErrorKind::SingularDesign, "non-finite coefficients");
  out.intercept = y_mean - x_mean.dot(out.slopes);
  out.inverse_gram_diagonal =
      llt.solve(Eigen::MatrixXd::Identity(k, k)).diagonal() / dn;
  const Eigen::VectorXd resid = yc - xc * out.slopes;
  out.residual_variance = resid.squaredNorm() / (dn - static_cast<double>(k) - 1.0);
  return out;
}

LinearModel ols_fit(const Dataset& d, std::span<const std::size_t> idx) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    if (idx[c] >= d.cols()) throw Error(ErrorKind::IndexOutOfRange, "column " + std::to_string(idx[c]));
    x.col(static_cast<Eigen::Index>(c)) = d.predictors().col(static_cast<Eigen::Index>(idx[c]));
  }
  const LeastSquaresSolution fit = solve_least_squares(x, d.response());
  LinearModel m;
  m.coefficients = fit.slopes.size() == 0 ? Eigen::VectorXd(0) : fit.slopes;
  m.intercept = fit.intercept;
  m.column_indices.assign(idx.begin(), idx.end());
  m.ridge = fit.ridge;
  return m;
}

Eigen::VectorXd LinearModel::predict(const Dataset& d) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d.rows()), intercept);
  for (std::size_t c = 0; c < column_indices.size(); ++c) {
    if (column_indices[c] >= d.cols()) {
      throw Error(ErrorKind::IndexOutOfRange, "model column " + std::to_string(column_indices[c]));
    }
    out += coefficients(static_cast<Eigen::Index>(c)) *
           d.predictors().col(static_cast<Eigen::Index>(column_indices[c]));
  }
  return out;
}

double rmse(const LinearModel& m, const Dataset& d) {
  const Eigen::VectorXd resid = d.response() - m.predict(d);
  return std::sqrt(resid.squaredNorm() / static_cast<double>(d.rows()));
}

}  // namespace stablesep
