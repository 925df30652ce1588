#pragma once

// Test-only helpers: independent oracles and data constructors.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace testsupport {

/// Two-sided normal tail 2 * int_{|z|}^{inf} phi(t) dt by composite Simpson.
inline double normal_two_sided_tail(double z, int intervals = 200000) {
  const double a = std::abs(z), b = a + 40.0;
  const double h = (b - a) / intervals;
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = phi(a) + phi(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * phi(a + i * h);
  return 2.0 * s * h / 3.0;
}

/// Three mutually orthogonal, mean-zero, unit-norm n-vectors.
inline Eigen::MatrixXd orthonormal_centered(int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(n, 4);
  m.col(0).setOnes();
  for (int j = 1; j < 4; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = nd(g);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 4);
  return q.rightCols(3);
}

/// Columns x, y, z whose sample correlation matrix is exactly `corr`.
inline Eigen::MatrixXd with_sample_correlation(const Eigen::Matrix3d& corr, int n, std::uint64_t seed) {
  const Eigen::MatrixXd e = orthonormal_centered(n, seed);
  const Eigen::Matrix3d l = corr.llt().matrixL();
  return e * l.transpose();
}

inline Eigen::VectorXd normal_vector(int n, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(g);
  return v;
}

/// Survival of sum_i w_i chi2_1 at each threshold by Monte Carlo.
inline std::vector<double> weighted_chi2_survival_mc(const std::vector<double>& w,
                                                     const std::vector<double>& thresholds, int draws,
                                                     std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  std::vector<long> above(thresholds.size(), 0);
  for (int d = 0; d < draws; ++d) {
    double s = 0.0;
    for (double wi : w) {
      const double z = nd(g);
      s += wi * z * z;
    }
    for (std::size_t t = 0; t < thresholds.size(); ++t) above[t] += s > thresholds[t];
  }
  std::vector<double> out;
  for (long a : above) out.push_back(static_cast<double>(a) / draws);
  return out;
}

/// Kolmogorov-Smirnov distance of a sample from Uniform[0,1].
inline double ks_uniform(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double d = 0.0;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max(d, std::max(std::abs((i + 1) / n - v[i]), std::abs(v[i] - i / n)));
  }
  return d;
}

}  // namespace testsupport
