#pragma once

#include "stablesep/dataset.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stablesep {

double precision_at_k(const VariableRanking& r, std::span<const std::size_t> truth, std::size_t k);

/// 1-based position of `unstable_idx` in the ranking.
std::size_t unstable_rank(const VariableRanking& r, std::size_t unstable_idx);

double average_error(std::span<const double> rmses);
/// Standard deviation of RMSE across environments, (|E| - 1) denominator.
double stability_error(std::span<const double> rmses);

struct EvaluationReport {
  double precision_at_k = 0.0;
  std::size_t unstable_rank = 0;
  std::vector<std::pair<std::string, double>> per_env_rmse;  // in environment order
  double average_error = 0.0;
  double stability_error = 0.0;

  static EvaluationReport build(double precision, std::size_t rank,
                                std::vector<std::pair<std::string, double>> per_env);
};

}  // namespace stablesep
