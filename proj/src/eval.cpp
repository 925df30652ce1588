#include "stablesep/eval.hpp"

#include "stablesep/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace stablesep {

double precision_at_k(const VariableRanking& r, std::span<const std::size_t> truth, std::size_t k) {
  if (truth.empty()) throw Error(ErrorKind::InvalidArgument, "empty truth set");
  if (k == 0 || k > r.order.size()) throw Error(ErrorKind::KTooLarge, "k=" + std::to_string(k));
  const std::unordered_set<std::size_t> causal(truth.begin(), truth.end());
  const auto hits = std::count_if(r.order.begin(), r.order.begin() + static_cast<std::ptrdiff_t>(k),
                                  [&](std::size_t j) { return causal.contains(j); });
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::size_t unstable_rank(const VariableRanking& r, std::size_t unstable_idx) {
  auto it = std::find(r.order.begin(), r.order.end(), unstable_idx);
  if (it == r.order.end()) {
    throw Error(ErrorKind::IndexOutOfRange, "variable " + std::to_string(unstable_idx) + " not ranked");
  }
  return static_cast<std::size_t>(it - r.order.begin()) + 1;
}

double average_error(std::span<const double> rmses) {
  if (rmses.empty()) throw Error(ErrorKind::TooFewEnvironments, "no environments");
  return std::accumulate(rmses.begin(), rmses.end(), 0.0) / static_cast<double>(rmses.size());
}

double stability_error(std::span<const double> rmses) {
  if (rmses.size() < 2) throw Error(ErrorKind::TooFewEnvironments, "need at least 2 environments");
  const double mean = average_error(rmses);
  double ss = 0.0;
  for (double v : rmses) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(rmses.size() - 1));
}

EvaluationReport EvaluationReport::build(double precision, std::size_t rank,
                                         std::vector<std::pair<std::string, double>> per_env) {
  EvaluationReport rep;
  rep.precision_at_k = precision;
  rep.unstable_rank = rank;
  rep.per_env_rmse = std::move(per_env);
  std::vector<double> values;
  for (const auto& [label, v] : rep.per_env_rmse) values.push_back(v);
  rep.average_error = stablesep::average_error(values);
  rep.stability_error = values.size() >= 2 ? stablesep::stability_error(values) : 0.0;
  return rep;
}

}  // namespace stablesep
