#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <scce/embedding.hpp>
#include <scce/estimator.hpp>
#include <scce/generator.hpp>
#include <scce/inference.hpp>
#include <scce/model.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace scce;

namespace {

// Standard normal quantiles frozen to full double precision.
constexpr double kZ975 = 1.9599639845400545;  // alpha = 0.05, two-sided
constexpr double kZ950 = 1.6448536269514722;  // alpha = 0.10, two-sided

ScoreEstimate two_layer_scores(const Matrix& m0, const Matrix& m1) {
  ScoreEstimate s;
  s.scores = {m0, m1};
  s.dimension = static_cast<int>(m0.rows());
  return s;
}

CovarianceEstimate make_cov(const Matrix& sigma, int layer, int K) {
  CovarianceEstimate c;
  c.matrix = sigma;
  c.layer = layer;
  c.dimension = K;
  return c;
}

}  // namespace

TEST_CASE("confidence_interval centers and widths") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 2.0, 5.0;
  ScoreEstimate scores;
  scores.scores = {m};
  scores.dimension = 2;

  Matrix sigma = Matrix::Zero(3, 3);
  sigma.diagonal() << 0.04, 0.09, 0.25;  // vech order (1,1), (1,2), (2,2)
  CovarianceEstimate cov = make_cov(sigma, 0, 2);

  SUBCASE("off-diagonal entry at 95%") {
    IntervalEstimate ci = confidence_interval(scores, cov, 1, 2, 0.05);
    CHECK(ci.layer == 0);
    CHECK(ci.row == 1);
    CHECK(ci.col == 2);
    CHECK(ci.level == doctest::Approx(0.95));
    CHECK(ci.center == doctest::Approx(2.0));
    CHECK(ci.half_width == doctest::Approx(kZ975 * 0.3).epsilon(1e-9));
    CHECK(ci.lower() == doctest::Approx(2.0 - kZ975 * 0.3).epsilon(1e-9));
    CHECK(ci.upper() == doctest::Approx(2.0 + kZ975 * 0.3).epsilon(1e-9));
  }
  SUBCASE("diagonal entry at 90%") {
    IntervalEstimate ci = confidence_interval(scores, cov, 2, 2, 0.10);
    CHECK(ci.center == doctest::Approx(5.0));
    CHECK(ci.half_width == doctest::Approx(kZ950 * 0.5).epsilon(1e-9));
  }
  SUBCASE("zero variance degenerates") {
    IntervalEstimate ci = confidence_interval(scores, cov, 1, 1, 0.05);
    // vech position (1,1) has variance 0.04, so probe a zeroed copy.
    CovarianceEstimate flat = make_cov(Matrix::Zero(3, 3), 0, 2);
    IntervalEstimate degenerate = confidence_interval(scores, flat, 1, 1, 0.05);
    CHECK(degenerate.half_width == doctest::Approx(0.0));
    CHECK(ci.half_width > 0.0);
  }
}

TEST_CASE("pair_test add-one p-value bounds") {
  Matrix m0(2, 2), m1(2, 2);
  m0 << 0.9, 0.1, 0.1, 0.7;

  SUBCASE("identical scores give p exactly 1") {
    m1 = m0;
    ScoreEstimate scores = two_layer_scores(m0, m1);
    Matrix sigma = Matrix::Identity(3, 3) * 0.1;
    PairTestResult r = pair_test(scores, make_cov(sigma, 0, 2),
                                 make_cov(sigma, 1, 2), 500, 11);
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.p_value == doctest::Approx(1.0));
    CHECK(r.null_samples == 500);
    CHECK(r.layer_k == 0);
    CHECK(r.layer_l == 1);
  }
  SUBCASE("zero covariance gives the minimum attainable p") {
    m1 = m0;
    m1(0, 0) += 0.5;
    ScoreEstimate scores = two_layer_scores(m0, m1);
    Matrix sigma = Matrix::Zero(3, 3);  // every null draw is exactly 0
    PairTestResult r = pair_test(scores, make_cov(sigma, 0, 2),
                                 make_cov(sigma, 1, 2), 499, 11);
    CHECK(r.statistic == doctest::Approx(0.5));
    CHECK(r.p_value == doctest::Approx(1.0 / 500.0));
  }
}

TEST_CASE("pair_test statistic is the Frobenius distance") {
  Matrix m0(2, 2), m1(2, 2);
  m0 << 0.5, 0.2, 0.2, 0.4;
  m1 << 0.1, -0.1, -0.1, 0.9;
  ScoreEstimate scores = two_layer_scores(m0, m1);
  Matrix sigma = Matrix::Identity(3, 3) * 0.05;
  PairTestResult r = pair_test(scores, make_cov(sigma, 0, 2),
                               make_cov(sigma, 1, 2), 200, 3);
  CHECK(r.statistic == doctest::Approx((m0 - m1).norm()).epsilon(1e-12));
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
}

TEST_CASE("pair_test is deterministic and swap-invariant") {
  Matrix m0(2, 2), m1(2, 2);
  m0 << 0.5, 0.2, 0.2, 0.4;
  m1 << 0.45, 0.25, 0.25, 0.35;
  ScoreEstimate scores = two_layer_scores(m0, m1);
  Matrix sa = Matrix::Identity(3, 3) * 0.03;
  Matrix sb = Matrix::Identity(3, 3) * 0.07;
  sb(0, 1) = sb(1, 0) = 0.01;

  PairTestResult a = pair_test(scores, make_cov(sa, 0, 2),
                               make_cov(sb, 1, 2), 1000, 77);
  PairTestResult b = pair_test(scores, make_cov(sa, 0, 2),
                               make_cov(sb, 1, 2), 1000, 77);
  CHECK(a.p_value == b.p_value);
  CHECK(a.statistic == b.statistic);

  // Passing the covariances in the other order cannot move the p-value:
  // the null is N(0, Sigma_k + Sigma_l) and the stream is keyed by the
  // unordered pair.
  PairTestResult swapped = pair_test(scores, make_cov(sb, 1, 2),
                                     make_cov(sa, 0, 2), 1000, 77);
  CHECK(swapped.p_value == a.p_value);
  CHECK(swapped.statistic == a.statistic);

  PairTestResult other_seed = pair_test(scores, make_cov(sa, 0, 2),
                                        make_cov(sb, 1, 2), 1000, 78);
  CHECK(other_seed.p_value != a.p_value);  // stream actually depends on seed
}

TEST_CASE("pair_test p-value matches the Gaussian tail it simulates") {
  // One-dimensional scores: the null statistic is |N(0, 1)| once the two
  // covariance halves of 0.5 are summed, so the p-value at statistic z is
  // P(|Z| >= z). Probe the 80th percentile of |Z|.
  const double z80 = 1.2815515655446004;
  Matrix m0(1, 1), m1(1, 1);
  m0 << z80;
  m1 << 0.0;
  ScoreEstimate scores = two_layer_scores(m0, m1);
  Matrix half(1, 1);
  half << 0.5;
  PairTestResult r = pair_test(scores, make_cov(half, 0, 1),
                               make_cov(half, 1, 1), 20000, 99);
  CHECK(std::abs(r.p_value - 0.2) < 0.01);  // ~3.5 MC standard errors
}

TEST_CASE("pair_test p-values are super-uniform under a true null") {
  // Fixed null: both layers share the covariance of a small two-community
  // model, and the observed difference is drawn from that very law, so
  // P(p <= u) <= u must hold up to Monte Carlo error.
  BlockModelSpec spec;
  spec.community_count = 2;
  spec.membership = BlockModelSpec::membership_from_proportions(20, {0.5, 0.5});
  Matrix b(2, 2);
  b << 0.7, 0.3, 0.3, 0.6;
  spec.connectivity = {b};
  spec.sparsity = 0.6;
  PopulationDecomposition pop = population_decomposition(spec);
  Matrix sigma = score_covariance_from_probabilities(
      pop.basis, pop.population_matrix(0), 0);
  CovarianceEstimate cov_k = make_cov(sigma, 0, 2);
  CovarianceEstimate cov_l = make_cov(sigma, 1, 2);

  Eigen::LLT<Matrix> chol(2.0 * sigma);
  REQUIRE(chol.info() == Eigen::Success);
  const Matrix root = chol.matrixL();

  std::mt19937_64 gen(2718);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int reps = 2000;
  const int B = 999;
  int below_001 = 0, below_005 = 0, below_010 = 0;
  for (int r = 0; r < reps; ++r) {
    Vector z(3);
    for (int i = 0; i < 3; ++i) z[i] = normal(gen);
    Vector diff = root * z;
    ScoreEstimate scores =
        two_layer_scores(devectorize_upper(diff, 2), Matrix::Zero(2, 2));
    PairTestResult res = pair_test(scores, cov_k, cov_l, B,
                                   static_cast<std::uint64_t>(r));
    // Add-one p-values live on the grid {1/(B+1), ..., 1}.
    const double steps = res.p_value * (B + 1);
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
    CHECK(res.p_value >= 1.0 / (B + 1));
    if (res.p_value <= 0.01) ++below_001;
    if (res.p_value <= 0.05) ++below_005;
    if (res.p_value <= 0.10) ++below_010;
  }
  auto bound = [reps](double u) {
    return u + 3.0 * std::sqrt(u * (1.0 - u) / reps);
  };
  CHECK(below_001 <= reps * bound(0.01));
  CHECK(below_005 <= reps * bound(0.05));
  CHECK(below_010 <= reps * bound(0.10));
}

TEST_CASE("all_pairs_tests is lexicographic and matches pair_test") {
  BlockModelSpec spec =
      benchmark_spec(60, 4, 0.3, benchmark_scales_a(), benchmark_scales_b());
  MultiLayerNetwork net = sample_network(spec, 21);
  EigenspaceEstimate emb = leading_eigenspace(aggregate_bias_adjusted(net), 3);
  ScoreEstimate scores = estimate_scores(net, emb);
  std::vector<CovarianceEstimate> covs;
  for (int l = 0; l < 4; ++l) covs.push_back(estimate_covariance(emb, scores, l));

  std::vector<PairTestResult> all = all_pairs_tests(scores, covs, 300, 5);
  REQUIRE(all.size() == 6);
  int idx = 0;
  for (int k = 0; k < 4; ++k) {
    for (int l = k + 1; l < 4; ++l) {
      CHECK(all[static_cast<std::size_t>(idx)].layer_k == k);
      CHECK(all[static_cast<std::size_t>(idx)].layer_l == l);
      PairTestResult single = pair_test(
          scores, covs[static_cast<std::size_t>(k)],
          covs[static_cast<std::size_t>(l)], 300, 5);
      CHECK(all[static_cast<std::size_t>(idx)].p_value == single.p_value);
      CHECK(all[static_cast<std::size_t>(idx)].statistic ==
            doctest::Approx(single.statistic).epsilon(1e-12));
      ++idx;
    }
  }

  std::vector<PairTestResult> threaded =
      all_pairs_tests(scores, covs, 300, 5, 2);
  REQUIRE(threaded.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(threaded[i].p_value == all[i].p_value);
  }
}

TEST_CASE("holm_procedure hand-worked examples") {
  SUBCASE("all three rejected") {
    std::vector<PairPValue> ps = {{0, 1, 0.01}, {0, 2, 0.02}, {1, 2, 0.04}};
    HolmOutcome out = holm_procedure(ps, 0.05, 3);
    REQUIRE(out.steps.size() == 3);
    CHECK(out.steps[0].threshold == doctest::Approx(0.05 / 3.0));
    CHECK(out.steps[1].threshold == doctest::Approx(0.05 / 2.0));
    CHECK(out.steps[2].threshold == doctest::Approx(0.05));
    CHECK(out.rejected(0, 1));
    CHECK(out.rejected(0, 2));
    CHECK(out.rejected(1, 2));
    CHECK(out.rejected(1, 0));  // symmetric flags
  }
  SUBCASE("first acceptance blocks later passes") {
    // Sorted ps are (0.012, 0.03, 0.04); 0.03 > 0.05/2 stops the walk, so
    // 0.04 <= 0.05 must still be accepted (not rejected).
    std::vector<PairPValue> ps = {{0, 1, 0.03}, {0, 2, 0.012}, {1, 2, 0.04}};
    HolmOutcome out = holm_procedure(ps, 0.05, 3);
    CHECK(out.rejected(0, 2));
    CHECK_FALSE(out.rejected(0, 1));
    CHECK_FALSE(out.rejected(1, 2));
    REQUIRE(out.steps.size() == 3);
    CHECK(out.steps[0].k == 0);
    CHECK(out.steps[0].l == 2);
    CHECK(out.steps[0].rejected);
    CHECK_FALSE(out.steps[1].rejected);
    CHECK_FALSE(out.steps[2].rejected);
  }
  SUBCASE("nothing above alpha is ever rejected") {
    std::vector<PairPValue> ps = {{0, 1, 0.051}, {0, 2, 0.9}, {1, 2, 0.2}};
    HolmOutcome out = holm_procedure(ps, 0.05, 3);
    for (const HolmStep& step : out.steps) CHECK_FALSE(step.rejected);
  }
  SUBCASE("Bonferroni rejections are a subset of Holm rejections") {
    std::vector<PairPValue> ps = {
        {0, 1, 0.004}, {0, 2, 0.016}, {0, 3, 0.3},
        {1, 2, 0.001}, {1, 3, 0.02}, {2, 3, 0.7}};
    const double alpha = 0.05;
    HolmOutcome out = holm_procedure(ps, alpha, 4);
    const double bonferroni = alpha / static_cast<double>(ps.size());
    for (const PairPValue& p : ps) {
      if (p.p_value <= bonferroni) CHECK(out.rejected(p.k, p.l));
    }
  }
}

TEST_CASE("holm_procedure ignores input order and breaks ties by pair") {
  std::vector<PairPValue> ps = {
      {0, 1, 0.02}, {0, 2, 0.02}, {1, 2, 0.001}};
  HolmOutcome a = holm_procedure(ps, 0.05, 3);
  std::reverse(ps.begin(), ps.end());
  HolmOutcome b = holm_procedure(ps, 0.05, 3);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].k == b.steps[i].k);
    CHECK(a.steps[i].l == b.steps[i].l);
    CHECK(a.steps[i].rejected == b.steps[i].rejected);
  }
  // Tied 0.02s are visited (0,1) then (0,2).
  CHECK(a.steps[1].k == 0);
  CHECK(a.steps[1].l == 1);
  CHECK(a.steps[2].k == 0);
  CHECK(a.steps[2].l == 2);
}

TEST_CASE("oracle_null returns a sorted deterministic sample") {
  BlockModelSpec spec =
      benchmark_spec(60, 4, 0.3, benchmark_scales_a(), benchmark_scales_a());
  std::vector<double> stats = oracle_null(spec, 0, 1, 40, 17);
  REQUIRE(stats.size() == 40);
  CHECK(std::is_sorted(stats.begin(), stats.end()));
  CHECK(stats.front() >= 0.0);

  std::vector<double> again = oracle_null(spec, 0, 1, 40, 17);
  CHECK(stats == again);
  std::vector<double> threaded = oracle_null(spec, 0, 1, 40, 17, 2);
  CHECK(stats == threaded);
}

TEST_CASE("coverage_experiment is exact in noiseless mode") {
  BlockModelSpec spec =
      benchmark_spec(40, 3, 0.3, benchmark_scales_a(), benchmark_scales_b());
  CoverageOptions opt;
  opt.reps = 3;
  opt.noiseless = true;
  opt.seed = 5;
  CoverageResult res = coverage_experiment(spec, opt);
  CHECK(res.coverage == doctest::Approx(1.0));
  // 3 reps x 3 layers x 6 upper-triangle entries.
  CHECK(res.total == 54);
  CHECK(res.covered == res.total);
}
