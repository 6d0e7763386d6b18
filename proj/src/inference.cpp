#include "scce/inference.hpp"

#include "scce/parallel.hpp"
#include "scce/rng.hpp"
#include "scce/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scce {

IntervalEstimate confidence_interval(const ScoreEstimate& scores,
                                     const CovarianceEstimate& covariance,
                                     int s, int t, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("confidence_interval: alpha must lie in (0,1)");
  }
  const int l = covariance.layer;
  if (l < 0 || l >= scores.layer_count()) {
    throw std::out_of_range("confidence_interval: covariance layer " +
                            std::to_string(l + 1) + " out of range");
  }
  if (covariance.dimension != scores.dimension) {
    throw std::invalid_argument(
        "confidence_interval: scores and covariance disagree on K");
  }
  const int K = scores.dimension;
  const int d = vec_index(s, t, K) - 1;  // validates 1 <= s <= t <= K
  const double variance = std::max(covariance.matrix(d, d), 0.0);
  IntervalEstimate out;
  out.layer = l;
  out.row = s;
  out.col = t;
  out.center = scores.scores[static_cast<std::size_t>(l)](s - 1, t - 1);
  out.half_width = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(variance);
  out.level = 1.0 - alpha;
  return out;
}

CoverageResult coverage_experiment(const BlockModelSpec& spec,
                                   const CoverageOptions& options) {
  if (options.reps < 1) {
    throw std::invalid_argument("coverage_experiment: reps must be >= 1");
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw std::invalid_argument("coverage_experiment: alpha must lie in (0,1)");
  }
  spec.validate();
  const PopulationDecomposition pop = population_decomposition(spec);
  const int K = spec.community_count;
  const int L = spec.layer_count();
  const double z = normal_quantile(1.0 - options.alpha / 2.0);

  std::vector<std::int64_t> covered(static_cast<std::size_t>(options.reps), 0);
  std::vector<std::int64_t> total(static_cast<std::size_t>(options.reps), 0);

  parallel_for(options.reps, options.threads, [&](int r) {
    const std::uint64_t rep_seed =
        keyed(options.seed, stream::kReplication, static_cast<std::uint64_t>(r));
    EigenspaceEstimate emb;
    ScoreEstimate scores;
    if (options.noiseless) {
      std::vector<Matrix> layers;
      layers.reserve(static_cast<std::size_t>(L));
      for (int l = 0; l < L; ++l) layers.push_back(pop.population_matrix(l));
      emb = leading_eigenspace(aggregate_squares(layers), K);
      scores = estimate_scores(layers, emb);
    } else {
      const MultiLayerNetwork net = sample_network(spec, rep_seed);
      emb = options.method == EmbeddingMethod::kMase
                ? mase_eigenspace(net, K)
                : leading_eigenspace(aggregate_bias_adjusted(net), K);
      scores = estimate_scores(net, emb);
    }
    const Matrix rotation = procrustes_align(pop.basis, emb.basis).rotation;

    std::int64_t c = 0;
    std::int64_t n_events = 0;
    for (int l = 0; l < L; ++l) {
      const CovarianceEstimate cov = estimate_covariance(emb, scores, l);
      const Matrix aligned = symmetrized(
          rotation * scores.scores[static_cast<std::size_t>(l)] *
          rotation.transpose());
      for (int t = 1; t <= K; ++t) {
        for (int s = 1; s <= t; ++s) {
          const int d = vec_index(s, t, K) - 1;
          const double half =
              z * std::sqrt(std::max(cov.matrix(d, d), 0.0));
          const double truth =
              pop.scores[static_cast<std::size_t>(l)](s - 1, t - 1);
          if (std::abs(aligned(s - 1, t - 1) - truth) <= half) ++c;
          ++n_events;
        }
      }
    }
    covered[static_cast<std::size_t>(r)] = c;
    total[static_cast<std::size_t>(r)] = n_events;
  });

  CoverageResult out;
  out.covered = std::accumulate(covered.begin(), covered.end(),
                                static_cast<std::int64_t>(0));
  out.total = std::accumulate(total.begin(), total.end(),
                              static_cast<std::int64_t>(0));
  out.coverage =
      out.total > 0 ? static_cast<double>(out.covered) / out.total : 0.0;
  return out;
}

PairTestResult pair_test(const ScoreEstimate& scores,
                         const CovarianceEstimate& cov_k,
                         const CovarianceEstimate& cov_l, int null_samples,
                         std::uint64_t seed) {
  if (null_samples < 1) {
    throw std::invalid_argument("pair_test: null_samples must be >= 1");
  }
  if (cov_k.layer == cov_l.layer) {
    throw std::invalid_argument("pair_test: the two layers must differ");
  }
  if (cov_k.layer < 0 || cov_k.layer >= scores.layer_count() ||
      cov_l.layer < 0 || cov_l.layer >= scores.layer_count()) {
    throw std::out_of_range("pair_test: layer index out of range");
  }
  const int K = scores.dimension;
  const int d = vec_dim(K);
  if (cov_k.matrix.rows() != d || cov_l.matrix.rows() != d) {
    throw std::invalid_argument("pair_test: covariance size does not match K");
  }

  const Matrix diff =
      scores.scores[static_cast<std::size_t>(cov_k.layer)] -
      scores.scores[static_cast<std::size_t>(cov_l.layer)];
  const double statistic = diff.norm();

  Matrix sum = cov_k.matrix + cov_l.matrix;
  sum.diagonal().array() += 1e-12;  // jitter keeps the sqrt well posed
  const Matrix sqrt_sigma = symmetric_sqrt(sum);

  const std::uint64_t lo =
      static_cast<std::uint64_t>(std::min(cov_k.layer, cov_l.layer));
  const std::uint64_t hi =
      static_cast<std::uint64_t>(std::max(cov_k.layer, cov_l.layer));
  const std::uint64_t key = keyed(seed, stream::kPairNull, lo, hi);

  int exceed = 0;
  for (int b = 0; b < null_samples; ++b) {
    const Vector v = gaussian_from_sqrt(
        sqrt_sigma, keyed(key, static_cast<std::uint64_t>(b)));
    if (frobenius_from_upper(v, K) >= statistic) ++exceed;
  }

  PairTestResult out;
  out.layer_k = cov_k.layer;
  out.layer_l = cov_l.layer;
  out.statistic = statistic;
  out.null_samples = null_samples;
  out.p_value = (1.0 + exceed) / (null_samples + 1.0);
  return out;
}

std::vector<PairTestResult> all_pairs_tests(
    const ScoreEstimate& scores,
    const std::vector<CovarianceEstimate>& covariances, int null_samples,
    std::uint64_t seed, int threads) {
  const int L = scores.layer_count();
  if (static_cast<int>(covariances.size()) != L) {
    throw std::invalid_argument(
        "all_pairs_tests: need exactly one covariance per layer");
  }
  for (int l = 0; l < L; ++l) {
    if (covariances[static_cast<std::size_t>(l)].layer != l) {
      throw std::invalid_argument(
          "all_pairs_tests: covariance list must be indexed by layer");
    }
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(L) * (L - 1) / 2);
  for (int k = 0; k < L; ++k) {
    for (int l = k + 1; l < L; ++l) pairs.emplace_back(k, l);
  }
  std::vector<PairTestResult> results(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int idx) {
    const auto [k, l] = pairs[static_cast<std::size_t>(idx)];
    results[static_cast<std::size_t>(idx)] =
        pair_test(scores, covariances[static_cast<std::size_t>(k)],
                  covariances[static_cast<std::size_t>(l)], null_samples,
                  seed);
  });
  return results;
}

namespace {

// M_hat for a single layer without touching the others.
Matrix single_layer_score(const MultiLayerNetwork& net,
                          const EigenspaceEstimate& emb, int l) {
  return symmetrized(emb.basis.transpose() * net.layer_as_real(l) *
                     emb.basis);
}

}  // namespace

std::vector<double> oracle_null(const BlockModelSpec& null_spec, int k, int l,
                                int reps, std::uint64_t seed, int threads) {
  if (reps < 1) {
    throw std::invalid_argument("oracle_null: reps must be >= 1");
  }
  const int L = null_spec.layer_count();
  if (k < 0 || l < 0 || k >= L || l >= L || k == l) {
    throw std::invalid_argument("oracle_null: invalid layer pair");
  }
  const int K = null_spec.community_count;
  std::vector<double> stats(static_cast<std::size_t>(reps), 0.0);
  parallel_for(reps, threads, [&](int r) {
    const std::uint64_t rep_seed =
        keyed(seed, stream::kOracleNull, static_cast<std::uint64_t>(r));
    const MultiLayerNetwork net = sample_network(null_spec, rep_seed);
    const EigenspaceEstimate emb =
        leading_eigenspace(aggregate_bias_adjusted(net), K);
    stats[static_cast<std::size_t>(r)] =
        (single_layer_score(net, emb, k) - single_layer_score(net, emb, l))
            .norm();
  });
  std::sort(stats.begin(), stats.end());
  return stats;
}

PowerCurveResult power_curve(const PowerOptions& options) {
  if (options.offsets.empty()) {
    throw std::invalid_argument("power_curve: offset grid is empty");
  }
  for (std::size_t i = 1; i < options.offsets.size(); ++i) {
    if (std::abs(options.offsets[i]) < std::abs(options.offsets[i - 1])) {
      throw std::invalid_argument(
          "power_curve: offsets must be ascending in magnitude (the grid is "
          "ordered by population separation)");
    }
  }
  if (options.reps < 1) {
    throw std::invalid_argument("power_curve: reps must be >= 1");
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw std::invalid_argument("power_curve: alpha must lie in (0,1)");
  }

  // All specs along the grid share one propensity draw so the oracle null
  // and the alternatives describe the same nodes.
  const std::uint64_t psi_seed = keyed(options.seed, stream::kPower, 0);
  const BlockModelSpec null_spec =
      paired_difference_spec(options.n, options.L, options.rho, 0.0,
                             options.propensity_norm, psi_seed);
  const std::vector<double> null_stats =
      oracle_null(null_spec, 0, 1, options.oracle_reps, options.seed,
                  options.threads);

  PowerCurveResult result;
  result.points.reserve(options.offsets.size());
  std::int64_t agree_total = 0;

  for (std::size_t di = 0; di < options.offsets.size(); ++di) {
    const double offset = options.offsets[di];
    const BlockModelSpec spec =
        paired_difference_spec(options.n, options.L, options.rho, offset,
                               options.propensity_norm, psi_seed);
    std::vector<std::uint8_t> reject_scce(
        static_cast<std::size_t>(options.reps), 0);
    std::vector<std::uint8_t> reject_oracle(
        static_cast<std::size_t>(options.reps), 0);

    parallel_for(options.reps, options.threads, [&](int r) {
      const std::uint64_t rep_seed =
          keyed(options.seed, stream::kPower, di + 1,
                static_cast<std::uint64_t>(r));
      const MultiLayerNetwork net = sample_network(spec, rep_seed);
      const EigenspaceEstimate emb =
          leading_eigenspace(aggregate_bias_adjusted(net), 3);
      ScoreEstimate probed;
      probed.dimension = emb.dimension();
      probed.scores.push_back(single_layer_score(net, emb, 0));
      probed.scores.push_back(single_layer_score(net, emb, 1));
      const CovarianceEstimate cov0 = estimate_covariance(emb, probed, 0);
      const CovarianceEstimate cov1 = estimate_covariance(emb, probed, 1);
      const PairTestResult test =
          pair_test(probed, cov0, cov1, options.null_samples, rep_seed);
      const auto above = std::distance(
          std::lower_bound(null_stats.begin(), null_stats.end(),
                           test.statistic),
          null_stats.end());
      const double oracle_p =
          (1.0 + static_cast<double>(above)) / (null_stats.size() + 1.0);
      reject_scce[static_cast<std::size_t>(r)] =
          test.p_value <= options.alpha ? 1 : 0;
      reject_oracle[static_cast<std::size_t>(r)] =
          oracle_p <= options.alpha ? 1 : 0;
    });

    PowerPoint point;
    point.offset = offset;
    point.separation = options.rho * std::abs(offset);
    std::int64_t rs = 0;
    std::int64_t ro = 0;
    std::int64_t agree = 0;
    for (int r = 0; r < options.reps; ++r) {
      rs += reject_scce[static_cast<std::size_t>(r)];
      ro += reject_oracle[static_cast<std::size_t>(r)];
      agree += reject_scce[static_cast<std::size_t>(r)] ==
                       reject_oracle[static_cast<std::size_t>(r)]
                   ? 1
                   : 0;
    }
    point.power = static_cast<double>(rs) / options.reps;
    point.oracle_power = static_cast<double>(ro) / options.reps;
    point.agreement = static_cast<double>(agree) / options.reps;
    agree_total += agree;
    result.points.push_back(point);
  }

  result.overall_agreement =
      static_cast<double>(agree_total) /
      (static_cast<double>(options.reps) * options.offsets.size());
  return result;
}

HolmOutcome holm_procedure(std::vector<PairPValue> pvalues, double alpha,
                           int layer_count) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("holm_procedure: alpha must lie in (0,1)");
  }
  if (layer_count < 2) {
    throw std::invalid_argument("holm_procedure: need at least two layers");
  }
  const std::size_t expected =
      static_cast<std::size_t>(layer_count) *
      static_cast<std::size_t>(layer_count - 1) / 2;
  if (pvalues.size() != expected) {
    throw std::invalid_argument(
        "holm_procedure: expected one p-value per unordered layer pair (" +
        std::to_string(expected) + "), got " +
        std::to_string(pvalues.size()));
  }
  std::vector<std::uint8_t> seen(
      static_cast<std::size_t>(layer_count) *
          static_cast<std::size_t>(layer_count),
      0);
  for (const auto& pv : pvalues) {
    if (pv.k < 0 || pv.l <= pv.k || pv.l >= layer_count) {
      throw std::invalid_argument("holm_procedure: pair (" +
                                  std::to_string(pv.k + 1) + ", " +
                                  std::to_string(pv.l + 1) +
                                  ") is not an ordered layer pair");
    }
    if (!(pv.p_value > 0.0 && pv.p_value <= 1.0)) {
      throw std::invalid_argument("holm_procedure: p-value outside (0, 1]");
    }
    auto& flag = seen[static_cast<std::size_t>(pv.k) *
                          static_cast<std::size_t>(layer_count) +
                      static_cast<std::size_t>(pv.l)];
    if (flag) {
      throw std::invalid_argument("holm_procedure: duplicate pair (" +
                                  std::to_string(pv.k + 1) + ", " +
                                  std::to_string(pv.l + 1) + ")");
    }
    flag = 1;
  }

  // Ascending p; ties resolved by the pair indices so reruns are stable.
  std::sort(pvalues.begin(), pvalues.end(),
            [](const PairPValue& a, const PairPValue& b) {
              if (a.p_value != b.p_value) return a.p_value < b.p_value;
              if (a.k != b.k) return a.k < b.k;
              return a.l < b.l;
            });

  HolmOutcome out;
  out.layer_count = layer_count;
  out.alpha = alpha;
  out.reject_flat.assign(static_cast<std::size_t>(layer_count) *
                             static_cast<std::size_t>(layer_count),
                         0);
  const std::size_t m = pvalues.size();
  bool stopped = false;
  for (std::size_t i = 0; i < m; ++i) {
    HolmStep step;
    step.k = pvalues[i].k;
    step.l = pvalues[i].l;
    step.p_value = pvalues[i].p_value;
    step.threshold = alpha / static_cast<double>(m - i);
    step.rejected = !stopped && step.p_value <= step.threshold;
    if (!step.rejected) stopped = true;
    if (step.rejected) {
      out.reject_flat[static_cast<std::size_t>(step.k) *
                          static_cast<std::size_t>(layer_count) +
                      static_cast<std::size_t>(step.l)] = 1;
      out.reject_flat[static_cast<std::size_t>(step.l) *
                          static_cast<std::size_t>(layer_count) +
                      static_cast<std::size_t>(step.k)] = 1;
    }
    out.steps.push_back(step);
  }
  return out;
}

}  // namespace scce
