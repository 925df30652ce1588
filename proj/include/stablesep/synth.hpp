#pragma once

#include "stablesep/dataset.hpp"
#include "stablesep/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stablesep::synth {

inline constexpr double kNoiseVariance = 0.3;
// Upper bound on pre-selection rows drawn per requested row.
inline constexpr std::size_t kMaxOversample = 200;

struct EnvironmentSpec {
  std::size_t n = 2000;
  std::size_t p = 10;
  std::optional<double> bias_rate;  // nullopt: unbiased
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// round(0.3 * p).
std::size_t causal_count(std::size_t p);

struct PredictorBlock {
  Eigen::MatrixXd values;  // causal columns first, then non-causal
  std::vector<std::string> names;
  std::vector<Role> roles;
  std::size_t num_causal = 0;
};

PredictorBlock gen_predictors(std::size_t n, std::size_t p, Rng& rng);

Eigen::VectorXd linear_coefficients(std::size_t num_causal);
Eigen::VectorXd nonlinear_indicators(std::size_t num_causal);

/// Noise-free part of the response; product indices wrap modulo num_causal.
Eigen::VectorXd response_signal(const Eigen::MatrixXd& causal);

Eigen::VectorXd gen_response(const Eigen::MatrixXd& causal, Rng& rng);

/// |r|^(-5 |y - sign(r) u|).
double keep_probability(double y, double unstable, double bias_rate);

/// Keep each row independently with keep_probability; retries with a fresh
/// sub-stream while fewer than 10% of rows survive.
Dataset biased_select(const Dataset& d, double bias_rate, Rng& rng);

Dataset make_environment(const EnvironmentSpec& spec);

}  // namespace stablesep::synth
