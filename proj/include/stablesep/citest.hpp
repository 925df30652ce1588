#pragma once

#include "stablesep/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace stablesep {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

enum class CiMethod { FisherZ, Rcit };

std::string_view to_string(CiMethod method);
CiMethod parse_ci_method(std::string_view text);

struct CiTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  CiMethod method = CiMethod::FisherZ;
  // Set when an Rcit request ran as FisherZ because n was too small.
  bool fell_back = false;
};

struct RcitParams {
  int num_features_xy = 5;
  int num_features_z = 100;
  double ridge = 1e-10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Smallest sample size at which the random-feature test is used.
inline constexpr std::size_t kRcitMinSamples = 50;

/// First-order partial correlation r_{xy.z}, clamped to (-1, 1).
double partial_correlation(const VectorRef& x, const VectorRef& y, const VectorRef& z);

/// Fisher z statistic sqrt(n - 4) * atanh(r_{xy.z}) with a two-sided normal p-value.
CiTestResult fisher_z_test(const VectorRef& x, const VectorRef& y, const VectorRef& z);

/// Median pairwise distance (median heuristic). Inputs longer than 500 are
/// thinned to 500 points by a fixed stride.
double median_bandwidth(const VectorRef& v);

/// n x m random Fourier features sqrt(2/m) cos(w v + b) for a Gaussian kernel
/// of the given bandwidth.
Eigen::MatrixXd rff_features(const VectorRef& v, int m, double bandwidth, Rng& rng);

/// Survival function of sum_i w_i chi2_1 at `stat`, by the three-cumulant
/// (Hall-Buckley-Eagleson) gamma approximation.
double hbe_pvalue(std::span<const double> weights, double stat);

/// Randomized conditional independence test of x and y given z.
CiTestResult rcit_test(const VectorRef& x, const VectorRef& y, const VectorRef& z,
                       const RcitParams& params);

/// Dispatch on `method`; `params` only matters for Rcit.
CiTestResult ci_test(CiMethod method, const VectorRef& x, const VectorRef& y, const VectorRef& z,
                     const RcitParams& params);

}  // namespace stablesep
