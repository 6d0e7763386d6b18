#pragma once

#include "scce/estimator.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace scce {

/// Two-sided confidence interval for one score entry (s, t), 1-based with
/// s <= t, at level 1 - alpha: center M_hat_l(s,t), half width
/// z_{1-alpha/2} * sqrt(Sigma_hat_dd). A zero variance gives a degenerate
/// (zero-width) interval.
struct IntervalEstimate {
  int layer = 0;  // 0-based
  int row = 0;    // s, 1-based
  int col = 0;    // t, 1-based
  double center = 0.0;
  double half_width = 0.0;
  double level = 0.0;  // 1 - alpha

  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
};

IntervalEstimate confidence_interval(const ScoreEstimate& scores,
                                     const CovarianceEstimate& covariance,
                                     int s, int t, double alpha);

/// Empirical coverage of the entrywise intervals over seeded replications:
/// each replication regenerates the network, re-estimates, aligns the
/// estimated basis to the population basis, and counts the events
/// |(Z M_hat_l Z^T)_st - M_l(s,t)| <= half_width over all s <= t and all
/// layers. In noiseless mode the sampled layers are replaced by the exact
/// population matrices (diagonal kept, no degree adjustment), which makes
/// every interval cover with zero width.
struct CoverageOptions {
  int reps = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 1;
  bool noiseless = false;
  EmbeddingMethod method = EmbeddingMethod::kAggregate;
};

struct CoverageResult {
  double coverage = 0.0;
  std::int64_t covered = 0;
  std::int64_t total = 0;
};

CoverageResult coverage_experiment(const BlockModelSpec& spec,
                                   const CoverageOptions& options);

/// Two-layer equality test: statistic T = ||M_hat_k - M_hat_l||_F, null
/// distribution simulated by drawing null_samples vectors from
/// N(0, Sigma_hat_k + Sigma_hat_l) and taking the Frobenius norm of the
/// corresponding symmetric matrix. p = (1 + #{T_b >= T}) / (B + 1), so
/// p in (0, 1] always. The draw stream is keyed by the unordered layer
/// pair: swapping the two covariance arguments cannot change the result.
struct PairTestResult {
  int layer_k = 0;
  int layer_l = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  int null_samples = 0;
};

PairTestResult pair_test(const ScoreEstimate& scores,
                         const CovarianceEstimate& cov_k,
                         const CovarianceEstimate& cov_l, int null_samples,
                         std::uint64_t seed);

/// All C(L,2) pair tests in lexicographic (k, l) order; requires one
/// covariance per layer, indexed by layer.
std::vector<PairTestResult> all_pairs_tests(
    const ScoreEstimate& scores,
    const std::vector<CovarianceEstimate>& covariances, int null_samples,
    std::uint64_t seed, int threads = 1);

/// Reference null distribution for T_kl obtained by regenerating whole
/// networks from the null model and re-estimating: returns the sorted
/// statistics (ascending).
std::vector<double> oracle_null(const BlockModelSpec& null_spec, int k, int l,
                                int reps, std::uint64_t seed, int threads = 1);

/// Power of the two-layer test along a sequence of connectivity offsets
/// applied to the probed layer (paired_difference_spec layout). For every
/// replication the same sampled network feeds both the simulated-null test
/// (plug-in covariances) and the regeneration oracle, so the two decision
/// sequences are directly comparable.
struct PowerOptions {
  std::vector<double> offsets;  // must be ascending in magnitude
  int n = 300;
  int L = 50;
  double rho = 0.2;
  int reps = 100;
  double alpha = 0.05;
  int null_samples = 2000;
  int oracle_reps = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::optional<double> propensity_norm;  // engaged => degree-corrected
};

struct PowerPoint {
  double offset = 0.0;
  double separation = 0.0;  // rho * |offset| = ||B_1 - B_2||_F scaled
  double power = 0.0;
  double oracle_power = 0.0;
  double agreement = 0.0;  // fraction of replications with equal decisions
};

struct PowerCurveResult {
  std::vector<PowerPoint> points;
  double overall_agreement = 0.0;
};

PowerCurveResult power_curve(const PowerOptions& options);

/// Holm step-down over a family of pairwise p-values: hypotheses are
/// visited by ascending p (ties broken by (k, l)); the i-th (1-based) is
/// rejected iff p <= alpha / (m - i + 1) and every earlier one was
/// rejected. The first acceptance stops all further rejections.
struct PairPValue {
  int k = 0;  // 0-based layers, k < l
  int l = 0;
  double p_value = 1.0;
};

struct HolmStep {
  int k = 0;
  int l = 0;
  double p_value = 1.0;
  double threshold = 0.0;
  bool rejected = false;
};

struct HolmOutcome {
  int layer_count = 0;
  double alpha = 0.0;
  std::vector<HolmStep> steps;           // in testing order
  std::vector<std::uint8_t> reject_flat;  // row-major L x L, symmetric

  bool rejected(int k, int l) const {
    return reject_flat[static_cast<std::size_t>(k) *
                           static_cast<std::size_t>(layer_count) +
                       static_cast<std::size_t>(l)] != 0;
  }
};

HolmOutcome holm_procedure(std::vector<PairPValue> pvalues, double alpha,
                           int layer_count);

}  // namespace scce
