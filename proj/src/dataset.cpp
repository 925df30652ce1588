#include "stablesep/dataset.hpp"

#include "stablesep/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace stablesep {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Causal: return "causal";
    case Role::NonCausal: return "noncausal";
    case Role::UnstableNonCausal: return "unstable";
    case Role::Unknown: return "unknown";
  }
  return "unknown";
}

Dataset::Dataset(Eigen::MatrixXd predictors, Eigen::VectorXd response,
                 std::vector<std::string> names, std::vector<Role> roles)
    : predictors_(std::move(predictors)),
      response_(std::move(response)),
      names_(std::move(names)),
      roles_(std::move(roles)) {
  if (predictors_.rows() != response_.size()) {
    throw Error(ErrorKind::InvalidArgument, "predictor rows (" + std::to_string(predictors_.rows()) +
                                                ") != response length (" +
                                                std::to_string(response_.size()) + ")");
  }
  if (predictors_.rows() < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 rows");
  if (predictors_.cols() < 1) throw Error(ErrorKind::InvalidArgument, "need at least 1 column");
  if (names_.size() != cols()) throw Error(ErrorKind::InvalidArgument, "name count != column count");
  if (roles_.empty()) roles_.assign(cols(), Role::Unknown);
  if (roles_.size() != cols()) throw Error(ErrorKind::InvalidArgument, "role count != column count");
  if (!predictors_.allFinite() || !response_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "non-finite entry");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) throw Error(ErrorKind::InvalidArgument, "duplicate name " + name);
  }
}

Eigen::VectorXd Dataset::column(std::size_t j) const {
  if (j >= cols()) throw Error(ErrorKind::IndexOutOfRange, "column " + std::to_string(j));
  return predictors_.col(static_cast<Eigen::Index>(j));
}

std::vector<std::size_t> Dataset::indices_with_role(Role role) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < roles_.size(); ++j) {
    if (roles_[j] == role) out.push_back(j);
  }
  return out;
}

std::optional<std::size_t> Dataset::unstable_index() const {
  auto it = std::find(roles_.begin(), roles_.end(), Role::UnstableNonCausal);
  if (it == roles_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - roles_.begin());
}

std::optional<std::size_t> Dataset::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

namespace {

std::pair<double, double> mean_sd(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double mean = v.mean();
  const double ss = (v.array() - mean).square().sum();
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

Standardization fit_standardization(const Dataset& d) {
  Standardization s;
  s.predictor_mean.resize(static_cast<Eigen::Index>(d.cols()));
  s.predictor_sd.resize(static_cast<Eigen::Index>(d.cols()));
  for (Eigen::Index j = 0; j < d.predictors().cols(); ++j) {
    auto [m, sd] = mean_sd(d.predictors().col(j));
    if (!(sd > 0.0)) throw Error(ErrorKind::ConstantColumn, d.names()[static_cast<std::size_t>(j)]);
    s.predictor_mean(j) = m;
    s.predictor_sd(j) = sd;
  }
  auto [m, sd] = mean_sd(d.response());
  if (!(sd > 0.0)) throw Error(ErrorKind::ConstantColumn, "response");
  s.response_mean = m;
  s.response_sd = sd;
  return s;
}

Dataset Standardization::apply(const Dataset& d) const {
  if (static_cast<Eigen::Index>(d.cols()) != predictor_mean.size()) {
    throw Error(ErrorKind::InvalidArgument, "standardization column count mismatch");
  }
  Eigen::MatrixXd x = (d.predictors().rowwise() - predictor_mean.transpose()).array().rowwise() /
                      predictor_sd.transpose().array();
  Eigen::VectorXd y = (d.response().array() - response_mean) / response_sd;
  return Dataset(std::move(x), std::move(y), d.names(), d.roles());
}

Dataset standardize(const Dataset& d) { return fit_standardization(d).apply(d); }

Dataset select_columns(const Dataset& d, std::span<const std::size_t> idx) {
  std::unordered_set<std::size_t> seen;
  for (auto j : idx) {
    if (j >= d.cols()) throw Error(ErrorKind::IndexOutOfRange, "column " + std::to_string(j));
    if (!seen.insert(j).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate column " + std::to_string(j));
    }
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(idx.size()));
  std::vector<std::string> names;
  std::vector<Role> roles;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    x.col(static_cast<Eigen::Index>(c)) = d.predictors().col(static_cast<Eigen::Index>(idx[c]));
    names.push_back(d.names()[idx[c]]);
    roles.push_back(d.roles()[idx[c]]);
  }
  return Dataset(std::move(x), d.response(), std::move(names), std::move(roles));
}

Dataset select_rows(const Dataset& d, std::span<const std::size_t> rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.cols()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= d.rows()) throw Error(ErrorKind::IndexOutOfRange, "row " + std::to_string(rows[i]));
    x.row(static_cast<Eigen::Index>(i)) = d.predictors().row(static_cast<Eigen::Index>(rows[i]));
    y(static_cast<Eigen::Index>(i)) = d.response()(static_cast<Eigen::Index>(rows[i]));
  }
  return Dataset(std::move(x), std::move(y), d.names(), d.roles());
}

VariableRanking VariableRanking::from_scores(std::span<const double> per_variable,
                                             std::optional<std::size_t> first) {
  VariableRanking r;
  r.order.resize(per_variable.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    if (per_variable[a] != per_variable[b]) return per_variable[a] < per_variable[b];
    if (first) {
      if (a == *first) return b != *first;
      if (b == *first) return false;
    }
    return a < b;
  });
  r.scores.reserve(per_variable.size());
  for (auto j : r.order) r.scores.push_back(per_variable[j]);
  return r;
}

void VariableRanking::validate() const {
  if (order.size() != scores.size()) throw Error(ErrorKind::InvalidArgument, "order/scores size mismatch");
  std::vector<bool> hit(order.size(), false);
  for (auto j : order) {
    if (j >= order.size() || hit[j]) throw Error(ErrorKind::InvalidArgument, "order is not a permutation");
    hit[j] = true;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "score outside [0,1]");
    }
    if (i > 0 && scores[i] < scores[i - 1]) throw Error(ErrorKind::InvalidArgument, "scores not sorted");
  }
}

}  // namespace stablesep
