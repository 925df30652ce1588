#include "stablesep/citest.hpp"
#include "stablesep/error.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace stablesep;
using testsupport::normal_vector;

TEST_CASE("partial correlation with all pairwise correlations 0.5 is 1/3") {
  Eigen::Matrix3d corr;
  corr << 1, 0.5, 0.5, 0.5, 1, 0.5, 0.5, 0.5, 1;
  const Eigen::MatrixXd d = testsupport::with_sample_correlation(corr, 200, 11);
  CHECK(partial_correlation(d.col(0), d.col(1), d.col(2)) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("partial correlation: independence and perfect dependence") {
  std::mt19937_64 g(3);
  const Eigen::VectorXd x = normal_vector(10000, g), y = normal_vector(10000, g), z = normal_vector(10000, g);
  CHECK(std::abs(partial_correlation(x, y, z)) < 0.1);
  CHECK(partial_correlation(x, x, z) == 1.0 - 1e-12);
  CHECK(partial_correlation(x, -x, z) == -1.0 + 1e-12);
}

TEST_CASE("partial correlation rejects degenerate inputs") {
  std::mt19937_64 g(5);
  const Eigen::VectorXd x = normal_vector(50, g), y = normal_vector(50, g);
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ConfigError;
  };
  CHECK(kind([&] { partial_correlation(x, y, x); }) == ErrorKind::DegenerateInput);
  CHECK(kind([&] { partial_correlation(x, y, Eigen::VectorXd::Constant(50, 2.0)); }) == ErrorKind::DegenerateInput);
  CHECK(kind([&] { partial_correlation(x.head(4), y.head(4), x.head(4)); }) == ErrorKind::InvalidArgument);
  CHECK(kind([&] { partial_correlation(x, y.head(49), x); }) == ErrorKind::InvalidArgument);
  CHECK(kind([&] { fisher_z_test(x, y, 2.0 * x); }) == ErrorKind::DegenerateInput);
}

TEST_CASE("fisher z at zero partial correlation") {
  Eigen::Matrix3d corr = Eigen::Matrix3d::Identity();
  const Eigen::MatrixXd d = testsupport::with_sample_correlation(corr, 100, 2);
  const CiTestResult r = fisher_z_test(d.col(0), d.col(1), d.col(2));
  CHECK(std::abs(r.statistic) < 1e-12);
  CHECK(r.p_value == doctest::Approx(1.0));
  CHECK(r.method == CiMethod::FisherZ);
}

TEST_CASE("fisher z at r = 1/3, n = 100 matches the integrated normal tail") {
  Eigen::Matrix3d corr;
  corr << 1, 1.0 / 3.0, 0, 1.0 / 3.0, 1, 0, 0, 0, 1;
  const Eigen::MatrixXd d = testsupport::with_sample_correlation(corr, 100, 9);
  const CiTestResult r = fisher_z_test(d.col(0), d.col(1), d.col(2));
  const double expected_stat = std::atanh(1.0 / 3.0) * std::sqrt(96.0);
  CHECK(r.statistic == doctest::Approx(expected_stat).epsilon(1e-10));
  CHECK(r.statistic == doctest::Approx(3.3957).epsilon(1e-4));
  const double oracle = testsupport::normal_two_sided_tail(expected_stat);
  CHECK(std::abs(r.p_value - oracle) < 1e-6);
  CHECK(std::abs(oracle - 6.8449887e-4) < 1e-9);
}

TEST_CASE("fisher z is symmetric and affine invariant") {
  std::mt19937_64 g(17);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd z = normal_vector(80, g);
    const Eigen::VectorXd x = z + normal_vector(80, g);
    const Eigen::VectorXd y = 0.3 * x - z + normal_vector(80, g);
    const CiTestResult a = fisher_z_test(x, y, z);
    const CiTestResult b = fisher_z_test(y, x, z);
    CHECK(std::abs(a.statistic - b.statistic) < 1e-12);
    CHECK(std::abs(a.p_value - b.p_value) < 1e-12);
    const Eigen::VectorXd xs = (3.5 * x).array() - 7.0;
    const Eigen::VectorXd ys = (0.01 * y).array() + 100.0;
    const Eigen::VectorXd zs = (42.0 * z).array() + 1.0;
    CHECK(std::abs(fisher_z_test(xs, ys, zs).p_value - a.p_value) < 1e-8);
  }
}

TEST_CASE("fisher z type-I error and uniformity under the null") {
  std::mt19937_64 g(2024);
  int rejections = 0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd x = normal_vector(500, g), y = normal_vector(500, g), z = normal_vector(500, g);
    rejections += fisher_z_test(x, y, z).p_value < 0.05;
  }
  const double rate = rejections / 1000.0;
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);

  std::vector<double> ps;
  for (int t = 0; t < 2000; ++t) {
    // Jointly Gaussian with x and y dependent only through z.
    const Eigen::VectorXd z = normal_vector(100, g);
    const Eigen::VectorXd x = 0.8 * z + normal_vector(100, g);
    const Eigen::VectorXd y = -0.5 * z + normal_vector(100, g);
    ps.push_back(fisher_z_test(x, y, z).p_value);
  }
  CHECK(testsupport::ks_uniform(ps) < 0.05);
}

TEST_CASE("median bandwidth") {
  Eigen::VectorXd v(3);
  v << 0, 1, 2;
  CHECK(median_bandwidth(v) == 1.0);
  Eigen::VectorXd w(2);
  w << 0, 4;
  CHECK(median_bandwidth(w) == 4.0);
  CHECK_THROWS_AS(median_bandwidth(Eigen::VectorXd::Constant(5, 1.0)), Error);
  Eigen::VectorXd four(4);
  four << 0, 1, 3, 7;  // distances 1,3,7,2,6,4 -> median (3+4)/2
  CHECK(median_bandwidth(four) == 3.5);
  // Long inputs use a fixed 500-point subsample: equal to the brute force on that subsample.
  std::mt19937_64 g(1);
  const Eigen::VectorXd big = normal_vector(1234, g);
  std::vector<double> sub, dist;
  for (int i = 0; i < 500; ++i) sub.push_back(big((i * 1234) / 500));
  for (std::size_t i = 0; i < sub.size(); ++i)
    for (std::size_t j = i + 1; j < sub.size(); ++j) dist.push_back(std::abs(sub[i] - sub[j]));
  std::sort(dist.begin(), dist.end());
  const double brute = 0.5 * (dist[dist.size() / 2 - 1] + dist[dist.size() / 2]);
  CHECK(median_bandwidth(big) == doctest::Approx(brute).epsilon(1e-14));
}

TEST_CASE("random Fourier features: bound, determinism, kernel approximation") {
  std::mt19937_64 g(8);
  const Eigen::VectorXd v = normal_vector(300, g);
  Rng a(99), b(99);
  const Eigen::MatrixXd f1 = rff_features(v, 25, 0.7, a);
  const Eigen::MatrixXd f2 = rff_features(v, 25, 0.7, b);
  CHECK(f1 == f2);
  CHECK(f1.rows() == 300);
  CHECK(f1.cols() == 25);
  CHECK(f1.cwiseAbs().maxCoeff() <= std::sqrt(2.0 / 25) + 1e-15);
  CHECK_THROWS_AS(rff_features(v, 0, 1.0, a), Error);
  CHECK_THROWS_AS(rff_features(v, 3, 0.0, a), Error);

  // Bochner: phi(x).phi(x') approximates the Gaussian kernel.
  Rng r(5);
  const double bw = 1.3;
  Eigen::VectorXd pts = normal_vector(40, g);
  const Eigen::MatrixXd f = rff_features(pts, 2000, bw, r);
  double worst = 0.0;
  for (int i = 0; i < 40; i += 2) {
    const double approx = f.row(i).dot(f.row(i + 1));
    const double exact = std::exp(-std::pow(pts(i) - pts(i + 1), 2) / (2 * bw * bw));
    worst = std::max(worst, std::abs(approx - exact));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("HBE p-value against chi-square Monte Carlo") {
  const std::vector<double> one = {1.0};
  CHECK(hbe_pvalue(one, 0.0) == 1.0);
  CHECK(std::abs(hbe_pvalue(one, 3.841459) - 0.05) < 0.005);
  const auto mc1 = testsupport::weighted_chi2_survival_mc({1.0}, {3.841459}, 1'000'000, 1);
  CHECK(std::abs(mc1[0] - 0.05) < 0.002);

  const std::vector<double> twos = {2.0, 2.0}, ones = {1.0, 1.0};
  const std::vector<double> xs = {0.5, 2.0, 4.0, 8.0};
  std::vector<double> thresholds;
  for (double x : xs) thresholds.push_back(2.0 * x);
  const auto mc2 = testsupport::weighted_chi2_survival_mc(twos, thresholds, 1'000'000, 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(hbe_pvalue(twos, 2.0 * xs[i]) == doctest::Approx(hbe_pvalue(ones, xs[i])).epsilon(1e-12));
    CHECK(std::abs(hbe_pvalue(twos, 2.0 * xs[i]) - mc2[i]) < 0.01);
  }

  // Moment matching is loose in the bulk for skewed weights; check the tail.
  const std::vector<double> mixed = {3.0, 1.0, 0.5, 0.25};
  const std::vector<double> stats = {10.0, 15.0, 20.0, 30.0};
  const auto mc3 = testsupport::weighted_chi2_survival_mc(mixed, stats, 1'000'000, 3);
  for (std::size_t i = 0; i < stats.size(); ++i) CHECK(std::abs(hbe_pvalue(mixed, stats[i]) - mc3[i]) < 0.01);

  CHECK_THROWS_AS(hbe_pvalue(std::vector<double>{}, 1.0), Error);
}

TEST_CASE("rcit falls back to fisher z below 50 samples") {
  std::mt19937_64 g(4);
  const Eigen::VectorXd x = normal_vector(30, g), y = normal_vector(30, g), z = normal_vector(30, g);
  const CiTestResult r = rcit_test(x, y, z, RcitParams{});
  CHECK(r.fell_back);
  CHECK(r.method == CiMethod::FisherZ);
  CHECK(r.p_value == fisher_z_test(x, y, z).p_value);
}

TEST_CASE("rcit parameters are validated") {
  RcitParams p;
  p.num_features_xy = 200;
  CHECK_THROWS_AS(p.validate(), Error);
  p = RcitParams{};
  p.ridge = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("rcit is deterministic and invariant to positive affine maps") {
  std::mt19937_64 g(12);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd z = normal_vector(400, g);
    const Eigen::VectorXd x = z + normal_vector(400, g);
    const Eigen::VectorXd y = z.array().square().matrix() + 0.2 * x + normal_vector(400, g);
    RcitParams params;
    params.rng_seed = 1000 + t;
    const CiTestResult a = rcit_test(x, y, z, params);
    CHECK(a.p_value == rcit_test(x, y, z, params).p_value);
    CHECK(a.method == CiMethod::Rcit);
    const Eigen::VectorXd xs = (2.0 * x).array() + 5.0;
    const Eigen::VectorXd ys = (0.1 * y).array() - 3.0;
    const Eigen::VectorXd zs = (7.0 * z).array() + 1.0;
    CHECK(std::abs(rcit_test(xs, ys, zs, params).p_value - a.p_value) < 1e-3);
    CHECK(a.p_value >= 0.0);
    CHECK(a.p_value <= 1.0);
  }
}

TEST_CASE("rcit calibration, power and chain d-separation") {
  std::mt19937_64 g(77);
  int rejections = 0;
  for (int t = 0; t < 500; ++t) {
    const Eigen::VectorXd x = normal_vector(1000, g), y = normal_vector(1000, g), z = normal_vector(1000, g);
    RcitParams params;
    params.rng_seed = static_cast<std::uint64_t>(t);
    rejections += rcit_test(x, y, z, params).p_value < 0.05;
  }
  const double rate = rejections / 500.0;
  MESSAGE("rcit type-I rate " << rate);
  CHECK(rate >= 0.02);
  CHECK(rate <= 0.09);

  {
    const Eigen::VectorXd x = normal_vector(1000, g), z = normal_vector(1000, g);
    const Eigen::VectorXd y = x + 0.1 * normal_vector(1000, g);
    CHECK(rcit_test(x, y, z, RcitParams{}).p_value < 0.01);
  }

  int chain_rejections = 0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd x = normal_vector(2000, g);
    const Eigen::VectorXd z = 0.8 * x + normal_vector(2000, g);
    const Eigen::VectorXd y = 0.8 * z + normal_vector(2000, g);
    RcitParams params;
    params.rng_seed = 5000 + static_cast<std::uint64_t>(t);
    chain_rejections += rcit_test(x, y, z, params).p_value < 0.05;
  }
  MESSAGE("rcit chain rejection rate " << chain_rejections / 200.0);
  CHECK(chain_rejections / 200.0 <= 0.10);
}

TEST_CASE("rcit agrees with fisher z on linear Gaussian data") {
  std::mt19937_64 g(31);
  int agree = 0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd z = normal_vector(2000, g);
    const Eigen::VectorXd x = 0.7 * z + normal_vector(2000, g);
    // Half the trials carry a direct x -> y effect.
    const double effect = t % 2 ? 0.3 : 0.0;
    const Eigen::VectorXd y = 0.7 * z + effect * x + normal_vector(2000, g);
    RcitParams params;
    params.rng_seed = 9000 + static_cast<std::uint64_t>(t);
    agree += (rcit_test(x, y, z, params).p_value < 0.05) == (fisher_z_test(x, y, z).p_value < 0.05);
  }
  MESSAGE("agreement " << agree / 200.0);
  CHECK(agree / 200.0 >= 0.90);
}
