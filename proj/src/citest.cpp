#include "stablesep/citest.hpp"

#include "stablesep/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace stablesep {

std::string_view to_string(CiMethod method) {
  switch (method) {
    case CiMethod::FisherZ: return "fisherz";
    case CiMethod::Rcit: return "rcit";
  }
  return "unknown";
}

CiMethod parse_ci_method(std::string_view text) {
  if (text == "fisherz" || text == "FisherZ" || text == "bnci") return CiMethod::FisherZ;
  if (text == "rcit" || text == "Rcit" || text == "RCIT") return CiMethod::Rcit;
  throw Error(ErrorKind::ConfigError, "unknown CI method '" + std::string(text) + "'");
}

void RcitParams::validate() const {
  if (num_features_xy < 1 || num_features_z < 1) {
    throw Error(ErrorKind::InvalidArgument, "feature counts must be positive");
  }
  if (num_features_xy > num_features_z) {
    throw Error(ErrorKind::InvalidArgument, "num_features_xy must not exceed num_features_z");
  }
  if (!(ridge > 0.0)) throw Error(ErrorKind::InvalidArgument, "ridge must be positive");
}

namespace {

constexpr double kClamp = 1e-12;

void check_same_length(const VectorRef& x, const VectorRef& y, const VectorRef& z, Eigen::Index min_n) {
  if (x.size() != y.size() || x.size() != z.size()) {
    throw Error(ErrorKind::InvalidArgument, "CI test inputs differ in length");
  }
  if (x.size() < min_n) {
    throw Error(ErrorKind::InvalidArgument, "CI test needs at least " + std::to_string(min_n) + " samples");
  }
}

Eigen::VectorXd centered(const VectorRef& v) { return v.array() - v.mean(); }

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

Eigen::VectorXd zscore(const VectorRef& v) {
  Eigen::VectorXd c = centered(v);
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(v.size() - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateInput, "constant input vector");
  return c / sd;
}

// Center and scale each feature column; columns with no spread are zeroed.
void normalize_columns(Eigen::MatrixXd& f) {
  const double denom = static_cast<double>(f.rows() - 1);
  for (Eigen::Index j = 0; j < f.cols(); ++j) {
    f.col(j).array() -= f.col(j).mean();
    const double sd = std::sqrt(f.col(j).squaredNorm() / denom);
    if (sd > 1e-12) {
      f.col(j) /= sd;
    } else {
      f.col(j).setZero();
    }
  }
}

}  // namespace

double partial_correlation(const VectorRef& x, const VectorRef& y, const VectorRef& z) {
  check_same_length(x, y, z, 5);
  const Eigen::VectorXd cx = centered(x), cy = centered(y), cz = centered(z);
  if (cx.squaredNorm() == 0.0 || cy.squaredNorm() == 0.0 || cz.squaredNorm() == 0.0) {
    throw Error(ErrorKind::DegenerateInput, "constant input vector");
  }
  const double rxy = correlation(cx, cy);
  const double rxz = correlation(cx, cz);
  const double ryz = correlation(cy, cz);
  if (std::abs(rxz) >= 1.0 - kClamp || std::abs(ryz) >= 1.0 - kClamp) {
    throw Error(ErrorKind::DegenerateInput, "conditioning variable is collinear with an input");
  }
  const double r = (rxy - rxz * ryz) / std::sqrt((1.0 - rxz * rxz) * (1.0 - ryz * ryz));
  return std::clamp(r, -1.0 + kClamp, 1.0 - kClamp);
}

CiTestResult fisher_z_test(const VectorRef& x, const VectorRef& y, const VectorRef& z) {
  const double r = partial_correlation(x, y, z);
  const double n = static_cast<double>(x.size());
  CiTestResult out;
  out.method = CiMethod::FisherZ;
  out.statistic = std::sqrt(n - 1.0 - 3.0) * std::atanh(r);
  out.p_value = std::clamp(std::erfc(std::abs(out.statistic) / std::numbers::sqrt2), 0.0, 1.0);
  return out;
}

double median_bandwidth(const VectorRef& v) {
  const Eigen::Index n = v.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "median_bandwidth needs at least 2 values");
  constexpr Eigen::Index kMaxPoints = 500;
  std::vector<double> pts;
  if (n > kMaxPoints) {
    pts.reserve(kMaxPoints);
    for (Eigen::Index i = 0; i < kMaxPoints; ++i) pts.push_back(v((i * n) / kMaxPoints));
  } else {
    pts.assign(v.data(), v.data() + n);
  }
  if (std::all_of(pts.begin(), pts.end(), [&](double a) { return a == pts.front(); })) {
    throw Error(ErrorKind::DegenerateInput, "all values equal");
  }
  std::vector<double> dist;
  dist.reserve(pts.size() * (pts.size() - 1) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) dist.push_back(std::abs(pts[i] - pts[j]));
  }
  auto median_of = [](std::vector<double>& d) {
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    const double upper = d[mid];
    if (d.size() % 2 == 1) return upper;
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
  };
  double med = median_of(dist);
  if (med == 0.0) {
    // Heavily tied sample: fall back to the median of the nonzero distances.
    std::erase(dist, 0.0);
    med = median_of(dist);
  }
  return med;
}

Eigen::MatrixXd rff_features(const VectorRef& v, int m, double bandwidth, Rng& rng) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "feature count must be positive");
  if (!(bandwidth > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be positive");
  Eigen::RowVectorXd w(m), b(m);
  for (int j = 0; j < m; ++j) w(j) = rng.normal(0.0, 1.0 / bandwidth);
  for (int j = 0; j < m; ++j) b(j) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Eigen::MatrixXd phase = v * w;
  phase.rowwise() += b;
  return std::sqrt(2.0 / m) * phase.array().cos().matrix();
}

double hbe_pvalue(std::span<const double> weights, double stat) {
  if (weights.empty()) throw Error(ErrorKind::InvalidArgument, "hbe_pvalue needs at least one weight");
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "weights must be positive");
    k1 += w;
    k2 += w * w;
    k3 += w * w * w;
  }
  k2 *= 2.0;
  k3 *= 8.0;
  const double nu = 8.0 * k2 * k2 * k2 / (k3 * k3);
  const double x = std::sqrt(2.0 * nu / k2) * (stat - k1) + nu;
  if (x <= 0.0) return 1.0;
  return std::clamp(boost::math::gamma_q(nu / 2.0, x / 2.0), 0.0, 1.0);
}

CiTestResult rcit_test(const VectorRef& x, const VectorRef& y, const VectorRef& z,
                       const RcitParams& params) {
  params.validate();
  check_same_length(x, y, z, 5);
  if (static_cast<std::size_t>(x.size()) < kRcitMinSamples) {
    CiTestResult out = fisher_z_test(x, y, z);
    out.fell_back = true;
    return out;
  }

  const Eigen::VectorXd sx = zscore(x), sy = zscore(y), sz = zscore(z);
  const Rng base(params.rng_seed);
  Rng rx = base.split(0), ry = base.split(1), rz = base.split(2);
  Eigen::MatrixXd fx = rff_features(sx, params.num_features_xy, median_bandwidth(sx), rx);
  Eigen::MatrixXd fy = rff_features(sy, params.num_features_xy, median_bandwidth(sy), ry);
  Eigen::MatrixXd fz = rff_features(sz, params.num_features_z, median_bandwidth(sz), rz);
  normalize_columns(fx);
  normalize_columns(fy);
  normalize_columns(fz);

  const double n = static_cast<double>(x.size());
  const Eigen::MatrixXd czz = fz.transpose() * fz / (n - 1.0);
  const Eigen::MatrixXd czx = fz.transpose() * fx / (n - 1.0);
  const Eigen::MatrixXd czy = fz.transpose() * fy / (n - 1.0);
  const Eigen::MatrixXd cxy = fx.transpose() * fy / (n - 1.0);

  Eigen::MatrixXd reg = czz;
  reg.diagonal().array() += params.ridge;
  const Eigen::LDLT<Eigen::MatrixXd> solver(reg);
  const Eigen::MatrixXd ax = solver.solve(czx);
  const Eigen::MatrixXd ay = solver.solve(czy);

  const Eigen::MatrixXd res_x = fx - fz * ax;
  const Eigen::MatrixXd res_y = fy - fz * ay;
  const Eigen::MatrixXd cxy_z = cxy - czx.transpose() * ay;

  CiTestResult out;
  out.method = CiMethod::Rcit;
  out.statistic = n * cxy_z.squaredNorm();

  const Eigen::Index mx = res_x.cols(), my = res_y.cols();
  Eigen::MatrixXd products(res_x.rows(), mx * my);
  for (Eigen::Index i = 0; i < mx; ++i) {
    for (Eigen::Index j = 0; j < my; ++j) {
      products.col(i * my + j) = res_x.col(i).cwiseProduct(res_y.col(j));
    }
  }
  const Eigen::MatrixXd cov = products.transpose() * products / n;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()(i) > 1e-10) weights.push_back(eig.eigenvalues()(i));
  }
  if (!std::isfinite(out.statistic)) throw Error(ErrorKind::DegenerateInput, "non-finite statistic");
  out.p_value = weights.empty() ? 1.0 : hbe_pvalue(weights, out.statistic);
  return out;
}

CiTestResult ci_test(CiMethod method, const VectorRef& x, const VectorRef& y, const VectorRef& z,
                     const RcitParams& params) {
  switch (method) {
    case CiMethod::FisherZ: return fisher_z_test(x, y, z);
    case CiMethod::Rcit: return rcit_test(x, y, z, params);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown CI method");
}

}  // namespace stablesep
