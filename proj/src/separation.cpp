#include "stablesep/separation.hpp"

#include "stablesep/error.hpp"
#include "stablesep/predict.hpp"

#include <algorithm>
#include <cmath>

namespace stablesep {

CiRanking rank_by_ci(const Dataset& d, const SeparationConfig& cfg) {
  const std::size_t p = d.cols();
  CiRanking out;
  out.seed = cfg.seed_variable ? *cfg.seed_variable : discover_seed(d);
  if (out.seed >= p) throw Error(ErrorKind::IndexOutOfRange, "seed variable " + std::to_string(out.seed));

  const Eigen::VectorXd seed_col = d.column(out.seed);
  const Rng rcit_base(cfg.rcit.rng_seed);
  std::vector<double> scores(p, 1.0);
  scores[out.seed] = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (j == out.seed) continue;
    RcitParams params = cfg.rcit;
    params.rng_seed = rcit_base.split(j).seed();
    ++out.tests_run;
    try {
      scores[j] = ci_test(cfg.method, d.predictors().col(static_cast<Eigen::Index>(j)), seed_col,
                          d.response(), params)
                      .p_value;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateInput) throw;
      scores[j] = 1.0;
      out.degenerate.push_back(j);
    }
  }
  out.ranking = VariableRanking::from_scores(scores, out.seed);
  return out;
}

std::vector<std::size_t> select_top_k(const VariableRanking& r, std::size_t k) {
  if (k == 0 || k > r.order.size()) {
    throw Error(ErrorKind::KTooLarge, "k=" + std::to_string(k) + " with " + std::to_string(r.order.size()) +
                                          " variables");
  }
  return {r.order.begin(), r.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

namespace {

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const Eigen::Index mid = v.size() / 2;
  return v.size() % 2 == 1 ? v(mid) : 0.5 * (v(mid - 1) + v(mid));
}

}  // namespace

std::vector<double> treatment_effect_scores(const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.rows());
  const auto p = static_cast<Eigen::Index>(d.cols());
  if (d.rows() < 50) throw Error(ErrorKind::InvalidArgument, "seed discovery needs at least 50 rows");
  std::vector<double> scores(d.cols(), 0.0);
  Eigen::MatrixXd design(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double cut = median(d.predictors().col(j));
    const Eigen::VectorXd treated = (d.predictors().col(j).array() > cut).cast<double>();
    const double share = treated.mean();
    if (share == 0.0 || share == 1.0) continue;
    // Column 0 is the indicator, the rest are the other predictors in order.
    design.col(0) = treated;
    Eigen::Index c = 1;
    for (Eigen::Index other = 0; other < p; ++other) {
      if (other != j) design.col(c++) = d.predictors().col(other);
    }
    const LeastSquaresSolution fit = solve_least_squares(design, d.response());
    const double se = std::sqrt(fit.residual_variance * fit.inverse_gram_diagonal(0));
    scores[static_cast<std::size_t>(j)] = se > 0.0 ? std::abs(fit.slopes(0)) / se : 0.0;
  }
  return scores;
}

std::size_t discover_seed(const Dataset& d) {
  const std::vector<double> scores = treatment_effect_scores(d);
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

VariableRanking correlation_ranking(const Dataset& d) {
  const Eigen::VectorXd yc = d.response().array() - d.response().mean();
  std::vector<double> scores(d.cols(), 1.0);
  for (std::size_t j = 0; j < d.cols(); ++j) {
    const Eigen::VectorXd xc = d.predictors().col(static_cast<Eigen::Index>(j)).array() -
                               d.predictors().col(static_cast<Eigen::Index>(j)).mean();
    const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
    if (denom > 0.0) scores[j] = std::clamp(1.0 - std::abs(xc.dot(yc) / denom), 0.0, 1.0);
  }
  return VariableRanking::from_scores(scores);
}

}  // namespace stablesep
