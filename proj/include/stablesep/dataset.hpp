#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stablesep {

enum class Role { Causal, NonCausal, UnstableNonCausal, Unknown };

std::string_view to_string(Role role);

/// Immutable predictor matrix plus response.
///
/// Rejects non-finite entries, duplicate names and mismatched shapes at
/// construction; every other module may assume a well-formed dataset.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd predictors, Eigen::VectorXd response, std::vector<std::string> names,
          std::vector<Role> roles = {});

  std::size_t rows() const noexcept { return static_cast<std::size_t>(predictors_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(predictors_.cols()); }

  const Eigen::MatrixXd& predictors() const noexcept { return predictors_; }
  const Eigen::VectorXd& response() const noexcept { return response_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<Role>& roles() const noexcept { return roles_; }

  Eigen::VectorXd column(std::size_t j) const;

  std::vector<std::size_t> indices_with_role(Role role) const;
  /// Causal columns (the ground-truth set when roles are known).
  std::vector<std::size_t> causal_indices() const { return indices_with_role(Role::Causal); }
  std::optional<std::size_t> unstable_index() const;
  std::optional<std::size_t> index_of(std::string_view name) const;

 private:
  Eigen::MatrixXd predictors_;
  Eigen::VectorXd response_;
  std::vector<std::string> names_;
  std::vector<Role> roles_;
};

/// Per-column location/scale learned on one dataset and reusable on others.
struct Standardization {
  Eigen::VectorXd predictor_mean;
  Eigen::VectorXd predictor_sd;
  double response_mean = 0.0;
  double response_sd = 1.0;

  Dataset apply(const Dataset& d) const;
};

/// Sample mean and (n-1) standard deviation of every column and the response.
/// Throws ConstantColumn when any of them has zero variance.
Standardization fit_standardization(const Dataset& d);

Dataset standardize(const Dataset& d);

Dataset select_columns(const Dataset& d, std::span<const std::size_t> idx);
Dataset select_rows(const Dataset& d, std::span<const std::size_t> rows);

/// Variables ordered by ascending score (p-value or p-value-like).
struct VariableRanking {
  std::vector<std::size_t> order;
  std::vector<double> scores;  // aligned with order

  std::size_t size() const noexcept { return order.size(); }

  /// Build from per-variable scores. Ties break by ascending index unless
  /// `first` names a variable that must lead its tie group.
  static VariableRanking from_scores(std::span<const double> per_variable,
                                     std::optional<std::size_t> first = std::nullopt);

  /// Throws InvalidArgument if the invariants do not hold.
  void validate() const;
};

}  // namespace stablesep
