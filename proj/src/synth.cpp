#include "stablesep/synth.hpp"

#include "stablesep/error.hpp"

#include <algorithm>
#include <cmath>

namespace stablesep::synth {

void EnvironmentSpec::validate() const {
  if (p < 4) throw Error(ErrorKind::InvalidArgument, "p must be at least 4");
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "n must be at least 2");
  if (bias_rate) {
    const double a = std::abs(*bias_rate);
    if (!(a > 1.0 && a <= 3.0)) {
      throw Error(ErrorKind::InvalidArgument, "bias rate must satisfy 1 < |r| <= 3");
    }
  }
}

std::size_t causal_count(std::size_t p) { return static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(p))); }

PredictorBlock gen_predictors(std::size_t n, std::size_t p, Rng& rng) {
  if (p < 4) throw Error(ErrorKind::InvalidArgument, "p must be at least 4");
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(p);
  const std::size_t pc = causal_count(p);
  const std::size_t pn = p - pc;

  auto draw = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    }
  };
  // The last column of each auxiliary block is only needed as a neighbour.
  Eigen::MatrixXd zc(rows, cols), zn(rows, cols);
  draw(zc);
  draw(zn);

  PredictorBlock out;
  out.num_causal = pc;
  out.values.resize(rows, cols);
  for (std::size_t i = 0; i < pc; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.values.col(c) = 0.8 * zc.col(c) + 0.2 * zc.col(c + 1);
    out.names.push_back("C" + std::to_string(i + 1));
    out.roles.push_back(Role::Causal);
  }
  for (std::size_t j = 0; j < pn; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    out.values.col(static_cast<Eigen::Index>(pc) + c) = 0.8 * zn.col(c) + 0.2 * zn.col(c + 1);
    out.names.push_back("N" + std::to_string(j + 1));
    out.roles.push_back(j + 1 == pn ? Role::UnstableNonCausal : Role::NonCausal);
  }
  return out;
}

Eigen::VectorXd linear_coefficients(std::size_t num_causal) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(num_causal));
  for (std::size_t i = 1; i <= num_causal; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    a(static_cast<Eigen::Index>(i - 1)) = sign * static_cast<double>(num_causal) / static_cast<double>(i);
  }
  return a;
}

Eigen::VectorXd nonlinear_indicators(std::size_t num_causal) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(num_causal));
  for (std::size_t j = 1; j <= num_causal; ++j) b(static_cast<Eigen::Index>(j - 1)) = (j % 3 == 1) ? 1.0 : 0.0;
  return b;
}

Eigen::VectorXd response_signal(const Eigen::MatrixXd& causal) {
  const auto pc = static_cast<std::size_t>(causal.cols());
  if (pc < 3) throw Error(ErrorKind::InvalidArgument, "response needs at least 3 causal columns");
  const Eigen::VectorXd alpha = linear_coefficients(pc);
  const Eigen::VectorXd beta = nonlinear_indicators(pc);
  Eigen::VectorXd y = causal * alpha;
  for (std::size_t j = 0; j < pc; ++j) {
    if (beta(static_cast<Eigen::Index>(j)) == 0.0) continue;
    const auto a = static_cast<Eigen::Index>(j);
    const auto b = static_cast<Eigen::Index>((j + 1) % pc);
    const auto c = static_cast<Eigen::Index>((j + 2) % pc);
    y.array() += beta(a) * (causal.col(a).array() * causal.col(b).array() * causal.col(c).array()).exp();
  }
  return y;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& causal, Rng& rng) {
  Eigen::VectorXd y = response_signal(causal);
  const double sd = std::sqrt(kNoiseVariance);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += rng.normal(0.0, sd);
  return y;
}

double keep_probability(double y, double unstable, double bias_rate) {
  const double sign = bias_rate > 0.0 ? 1.0 : -1.0;
  const double dist = std::abs(y - sign * unstable);
  return std::pow(std::abs(bias_rate), -5.0 * dist);
}

namespace {

std::vector<std::size_t> draw_kept_rows(const Eigen::VectorXd& y, const Eigen::VectorXd& u, double r, Rng& rng) {
  std::vector<std::size_t> kept;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (rng.uniform() < keep_probability(y(i), u(i), r)) kept.push_back(static_cast<std::size_t>(i));
  }
  return kept;
}

std::size_t collapse_floor(std::size_t n) {
  return std::max<std::size_t>(50, static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(n))));
}

}  // namespace

Dataset biased_select(const Dataset& d, double bias_rate, Rng& rng) {
  if (!(std::abs(bias_rate) > 1.0)) throw Error(ErrorKind::InvalidArgument, "bias rate must satisfy |r| > 1");
  const auto unstable = d.unstable_index();
  if (!unstable) throw Error(ErrorKind::InvalidArgument, "dataset has no unstable non-causal column");
  const Eigen::VectorXd u = d.column(*unstable);
  const std::size_t target = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(d.rows())));

  constexpr int kRetries = 5;
  std::vector<std::size_t> best;
  for (int attempt = 0; attempt <= kRetries; ++attempt) {
    Rng sub = rng.split(static_cast<std::uint64_t>(attempt));
    Rng& coins = attempt == 0 ? rng : sub;
    std::vector<std::size_t> kept = draw_kept_rows(d.response(), u, bias_rate, coins);
    if (kept.size() > best.size()) best = std::move(kept);
    if (best.size() >= target) break;
  }
  if (best.size() < collapse_floor(d.rows()) || best.size() < 2) {
    throw Error(ErrorKind::SelectionCollapse, "kept " + std::to_string(best.size()) + " of " +
                                                  std::to_string(d.rows()) + " rows");
  }
  return select_rows(d, best);
}

Dataset make_environment(const EnvironmentSpec& spec) {
  spec.validate();
  const Rng root(spec.rng_seed);
  const auto rows = static_cast<Eigen::Index>(spec.n);

  if (!spec.bias_rate) {
    Rng pred_rng = root.split(0), noise_rng = root.split(1);
    PredictorBlock block = gen_predictors(spec.n, spec.p, pred_rng);
    Eigen::VectorXd y = gen_response(block.values.leftCols(static_cast<Eigen::Index>(block.num_causal)), noise_rng);
    return Dataset(std::move(block.values), std::move(y), std::move(block.names), std::move(block.roles));
  }

  // Biased: draw pre-selection batches of n rows until n rows survive.
  const double r = *spec.bias_rate;
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(spec.p));
  Eigen::VectorXd y(rows);
  std::vector<std::string> names;
  std::vector<Role> roles;
  Eigen::Index filled = 0;
  for (std::size_t batch = 0; batch < kMaxOversample && filled < rows; ++batch) {
    Rng batch_rng = root.split(2 + batch);
    Rng pred_rng = batch_rng.split(0), noise_rng = batch_rng.split(1), coin_rng = batch_rng.split(2);
    PredictorBlock block = gen_predictors(spec.n, spec.p, pred_rng);
    const Eigen::VectorXd yb =
        gen_response(block.values.leftCols(static_cast<Eigen::Index>(block.num_causal)), noise_rng);
    const Eigen::VectorXd u = block.values.col(static_cast<Eigen::Index>(spec.p) - 1);
    for (std::size_t i : draw_kept_rows(yb, u, r, coin_rng)) {
      if (filled == rows) break;
      x.row(filled) = block.values.row(static_cast<Eigen::Index>(i));
      y(filled) = yb(static_cast<Eigen::Index>(i));
      ++filled;
    }
    if (names.empty()) {
      names = std::move(block.names);
      roles = std::move(block.roles);
    }
  }
  if (static_cast<std::size_t>(filled) < collapse_floor(spec.n)) {
    throw Error(ErrorKind::SelectionCollapse, "only " + std::to_string(filled) + " rows survived selection");
  }
  return Dataset(x.topRows(filled), y.head(filled), std::move(names), std::move(roles));
}

}  // namespace stablesep::synth
