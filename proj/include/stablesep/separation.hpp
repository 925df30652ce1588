#pragma once

#include "stablesep/citest.hpp"
#include "stablesep/dataset.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace stablesep {

struct SeparationConfig {
  // nullopt means discover the seed from data.
  std::optional<std::size_t> seed_variable;
  CiMethod method = CiMethod::FisherZ;
  std::size_t k = 1;
  RcitParams rcit;
};

struct CiRanking {
  VariableRanking ranking;
  std::size_t seed = 0;
  std::size_t tests_run = 0;
  // Variables whose test degenerated and were scored 1.
  std::vector<std::size_t> degenerate;
};

/// Rank every variable by the p-value of one CI test against the seed given
/// the response. The seed itself is placed first with score 0.
CiRanking rank_by_ci(const Dataset& d, const SeparationConfig& cfg);

std::vector<std::size_t> select_top_k(const VariableRanking& r, std::size_t k);

/// |t|-statistic of the median-split indicator of each variable in a
/// regression of the response on (indicator, other predictors, intercept).
std::vector<double> treatment_effect_scores(const Dataset& d);

/// Variable with the largest adjusted effect of its median-split indicator.
std::size_t discover_seed(const Dataset& d);

/// Descending |corr(X_j, Y)|, stored as score 1 - |corr|.
VariableRanking correlation_ranking(const Dataset& d);

}  // namespace stablesep
