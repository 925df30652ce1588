#include "stablesep/error.hpp"
#include "stablesep/separation.hpp"
#include "stablesep/synth.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace stablesep;

namespace {

Dataset unbiased(std::uint64_t seed, std::size_t p = 10, std::size_t n = 2000) {
  return synth::make_environment({n, p, std::nullopt, seed});
}

Dataset biased(std::uint64_t seed, double r) {
  return synth::make_environment({2000, 10, r, seed});
}

Dataset from(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j));
  return Dataset(x, y, names);
}

double score_of(const VariableRanking& r, std::size_t j) {
  for (std::size_t pos = 0; pos < r.order.size(); ++pos)
    if (r.order[pos] == j) return r.scores[pos];
  throw std::out_of_range("variable not ranked");
}

bool all_causal(const Dataset& d, const std::vector<std::size_t>& idx) {
  const auto truth = d.causal_indices();
  const std::set<std::size_t> t(truth.begin(), truth.end());
  return std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return t.count(i) > 0; });
}

int top3_hits(CiMethod m) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Dataset d = standardize(unbiased(100 + s));
    SeparationConfig cfg;
    cfg.seed_variable = 0;
    cfg.k = 3;
    cfg.method = m;
    cfg.rcit.rng_seed = s;
    if (all_causal(d, select_top_k(rank_by_ci(d, cfg).ranking, 3))) ++hits;
  }
  return hits;
}

}  // namespace

TEST_CASE("top k recovers the causal set with the kernel test") { CHECK(top3_hits(CiMethod::Rcit) >= 9); }

// Without selection the exp term leaves Y with extreme outliers, and the
// linear partial correlation misses the third causal variable most of the time.
TEST_CASE("top k recovers the causal set with the Fisher test" * doctest::should_fail()) {
  CHECK(top3_hits(CiMethod::FisherZ) >= 9);
}

TEST_CASE("a copy of the seed ranks right after it") {
  std::mt19937_64 g(7);
  Eigen::MatrixXd x(500, 4);
  for (int j = 0; j < 4; ++j) x.col(j) = testsupport::normal_vector(500, g);
  x.col(2) = x.col(0) + 1e-3 * testsupport::normal_vector(500, g);
  const Eigen::VectorXd y = x.col(0) + x.col(1) + testsupport::normal_vector(500, g);
  SeparationConfig cfg;
  cfg.seed_variable = 0;
  const CiRanking r = rank_by_ci(from(x, y), cfg);
  CHECK(r.ranking.order[0] == 0);
  CHECK(r.ranking.order[1] == 2);
  CHECK(score_of(r.ranking, 2) < 1e-12);
  CHECK(r.tests_run == 3);
}

TEST_CASE("seed leads and the ranking is a permutation") {
  const Dataset d = unbiased(3);
  for (std::size_t seed : {0u, 4u, 9u}) {
    SeparationConfig cfg;
    cfg.seed_variable = seed;
    const CiRanking r = rank_by_ci(d, cfg);
    CHECK(r.ranking.order.front() == seed);
    CHECK(r.ranking.scores.front() == 0.0);
    CHECK(r.tests_run == d.cols() - 1);
    CHECK_NOTHROW(r.ranking.validate());
    std::vector<std::size_t> sorted = r.ranking.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
  }
  SeparationConfig bad;
  bad.seed_variable = 10;
  CHECK_THROWS_AS(rank_by_ci(d, bad), Error);
}

TEST_CASE("pure noise gives spread out p-values") {
  std::mt19937_64 g(8);
  Eigen::MatrixXd x(400, 30);
  for (int j = 0; j < 30; ++j) x.col(j) = testsupport::normal_vector(400, g);
  const Eigen::VectorXd y = testsupport::normal_vector(400, g);
  SeparationConfig cfg;
  cfg.seed_variable = 0;
  const CiRanking r = rank_by_ci(from(x, y), cfg);
  std::vector<double> ps;
  for (std::size_t j = 1; j < 30; ++j) ps.push_back(score_of(r.ranking, j));
  std::sort(ps.begin(), ps.end());
  CHECK(ps[ps.size() / 2] > 0.2);
  CHECK(ps[ps.size() / 2] < 0.8);
}

TEST_CASE("select_top_k edge cases") {
  const VariableRanking r = VariableRanking::from_scores(std::vector<double>{0.5, 0.1, 0.0, 0.9}, 2);
  CHECK(select_top_k(r, 1) == std::vector<std::size_t>{2});
  CHECK(select_top_k(r, 4).size() == 4);
  try {
    select_top_k(r, 0);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::KTooLarge);
  }
  CHECK_THROWS_AS(select_top_k(r, 5), Error);
}

TEST_CASE("causal and non-causal p-values separate on both backends") {
  for (CiMethod m : {CiMethod::FisherZ, CiMethod::Rcit}) {
    std::vector<double> causal, noncausal;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Dataset d = unbiased(500 + s);
      SeparationConfig cfg;
      cfg.seed_variable = 0;
      cfg.method = m;
      cfg.rcit.rng_seed = s;
      const CiRanking r = rank_by_ci(d, cfg);
      for (std::size_t j = 1; j < d.cols(); ++j)
        (d.roles()[j] == Role::Causal ? causal : noncausal).push_back(score_of(r.ranking, j));
    }
    std::sort(causal.begin(), causal.end());
    std::sort(noncausal.begin(), noncausal.end());
    CAPTURE(to_string(m));
    CHECK(causal[causal.size() / 2] < 0.01);
    CHECK(noncausal[noncausal.size() / 2] > 0.2);
  }
}

TEST_CASE("ranking ignores row order") {
  const Dataset d = unbiased(11, 10, 600);
  std::vector<std::size_t> rows(d.rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::mt19937_64 g(9);
  std::shuffle(rows.begin(), rows.end(), g);
  SeparationConfig cfg;
  cfg.seed_variable = 0;
  const CiRanking a = rank_by_ci(d, cfg);
  const CiRanking b = rank_by_ci(select_rows(d, rows), cfg);
  CHECK(a.ranking.order == b.ranking.order);
  for (std::size_t j = 0; j < d.cols(); ++j)
    CHECK(std::abs(score_of(a.ranking, j) - score_of(b.ranking, j)) < 1e-9);
}

TEST_CASE("degenerate variables score one and are flagged") {
  std::mt19937_64 g(10);
  Eigen::MatrixXd x(300, 4);
  for (int j = 0; j < 4; ++j) x.col(j) = testsupport::normal_vector(300, g);
  const Eigen::VectorXd y = x.col(0) + x.col(1) + testsupport::normal_vector(300, g);
  x.col(3) = y;
  SeparationConfig cfg;
  cfg.seed_variable = 0;
  const CiRanking r = rank_by_ci(from(x, y), cfg);
  CHECK(r.degenerate == std::vector<std::size_t>{3});
  CHECK(score_of(r.ranking, 3) == 1.0);
  CHECK(r.ranking.order.back() == 3);
}

TEST_CASE("treatment effect statistic matches an explicit regression") {
  std::mt19937_64 g(13);
  Eigen::MatrixXd x(200, 3);
  for (int j = 0; j < 3; ++j) x.col(j) = testsupport::normal_vector(200, g);
  const Eigen::VectorXd y = x.col(0) - 0.5 * x.col(2) + testsupport::normal_vector(200, g);
  const std::vector<double> got = treatment_effect_scores(from(x, y));
  for (int j = 0; j < 3; ++j) {
    std::vector<double> v(x.col(j).data(), x.col(j).data() + 200);
    std::nth_element(v.begin(), v.begin() + 99, v.end());
    const double lo = v[99];
    const double hi = *std::min_element(v.begin() + 100, v.end());
    const double med = 0.5 * (lo + hi);
    Eigen::MatrixXd design(200, 3);
    design.col(0).setOnes();
    for (int i = 0; i < 200; ++i) design(i, 1) = x(i, j) > med ? 1.0 : 0.0;
    design.col(2) = x.col(j == 0 ? 1 : 0);
    Eigen::MatrixXd full(200, 4);
    full << design, x.col(j == 2 ? 1 : 2);
    const Eigen::MatrixXd inv = (full.transpose() * full).inverse();
    const Eigen::VectorXd beta = inv * full.transpose() * y;
    const double s2 = (y - full * beta).squaredNorm() / (200 - 4);
    CHECK(got[j] == doctest::Approx(std::abs(beta(1)) / std::sqrt(s2 * inv(1, 1))).epsilon(1e-8));
  }
}

TEST_CASE("single signal is discovered") {
  std::mt19937_64 g(11);
  Eigen::MatrixXd x(400, 5);
  for (int j = 0; j < 5; ++j) x.col(j) = testsupport::normal_vector(400, g);
  const Eigen::VectorXd y = 2.0 * x.col(3) + 0.1 * testsupport::normal_vector(400, g);
  CHECK(discover_seed(from(x, y)) == 3);
  CHECK_THROWS_AS(discover_seed(from(x.topRows(20), y.head(20))), Error);
}

// The heavy tail of the exp term inflates every standard error; over 100
// seeds only about three quarters of the discovered seeds are causal.
TEST_CASE("discovered seed is causal on unbiased data" * doctest::should_fail()) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Dataset u = standardize(unbiased(700 + s));
    if (u.roles()[discover_seed(u)] == Role::Causal) ++hits;
  }
  CHECK(hits >= 9);
}

// Selection at r = 2 ties Y to the unstable variable tightly enough that its
// adjusted effect dominates every causal one.
TEST_CASE("discovered seed is causal on biased data" * doctest::should_fail()) {
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Dataset b = standardize(biased(800 + s, 2.0));
    if (b.roles()[discover_seed(b)] == Role::Causal) ++hits;
  }
  CHECK(hits >= 8);
}

TEST_CASE("selection bias hands the seed to the unstable variable") {
  int unstable = 0, causal_bounded = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Dataset b = standardize(biased(800 + s, 2.0));
    if (discover_seed(b) == *b.unstable_index()) ++unstable;
    const Dataset mild = standardize(biased(800 + s, 1.3));
    if (mild.roles()[discover_seed(mild)] == Role::Causal) ++causal_bounded;
  }
  CHECK(unstable >= 9);
  CHECK(causal_bounded >= 9);
}

TEST_CASE("correlation baseline") {
  std::mt19937_64 g(12);
  Eigen::MatrixXd x(500, 5);
  for (int j = 0; j < 5; ++j) x.col(j) = testsupport::normal_vector(500, g);
  const VariableRanking r = correlation_ranking(from(x, x.col(3)));
  CHECK(r.order.front() == 3);
  CHECK(r.scores.front() < 1e-12);

  // Selection bias makes the unstable variable look predictive.
  int top3 = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Dataset d = biased(900 + s, 2.0);
    const VariableRanking c = correlation_ranking(d);
    const std::size_t u = *d.unstable_index();
    if (std::find(c.order.begin(), c.order.begin() + 3, u) != c.order.begin() + 3) ++top3;
  }
  CHECK(top3 >= 4);
}
