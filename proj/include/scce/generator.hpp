#pragma once

#include "scce/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace scce {

/// Exact low-rank decomposition of the population: per-layer expected
/// adjacency Q_l = basis * scores[l] * basis^T with an orthonormal n x K
/// basis shared across layers.
struct PopulationDecomposition {
  Matrix basis;                // n x K, orthonormal columns
  std::vector<Matrix> scores;  // L symmetric K x K matrices

  int layer_count() const { return static_cast<int>(scores.size()); }

  /// Materializes Q_l = basis * scores[l] * basis^T.
  Matrix population_matrix(int l) const;
};

/// Samples the L adjacency matrices of the model: independent edges with
/// P(A_l(i,j) = 1) = rho * psi_i * psi_j * B_l(g_i, g_j), symmetric and
/// hollow. Every edge indicator is a pure function of (seed, l, i, j), so
/// the result is reproducible and layers can be filled in any order.
/// Throws std::invalid_argument naming (layer, i, j) if a probability
/// exceeds 1.
MultiLayerNetwork sample_network(const BlockModelSpec& spec,
                                 std::uint64_t seed);

/// Population decomposition of the model: for the plain block model
/// basis = Theta * Delta^{-1/2} and scores[l] = rho * Delta^{1/2} B_l
/// Delta^{1/2}; in the degree-corrected case Delta is replaced by the
/// effective sizes and basis rows are scaled by the propensities.
/// Throws std::invalid_argument if some community is empty.
PopulationDecomposition population_decomposition(const BlockModelSpec& spec);

/// Q_l assembled directly from the parameters, rho * diag(psi) * Theta B_l
/// Theta^T * diag(psi), bypassing the decomposition. Used as an independent
/// route for validating population_decomposition.
Matrix population_matrix_direct(const BlockModelSpec& spec, int l);

/// The fixed 3 x 3 connectivity family used by the simulation benchmarks:
/// B = W diag(scales) W^T for a hard-coded orthogonal W. Entries of the
/// result must land in [0, 1] or std::invalid_argument is thrown.
Matrix benchmark_connectivity(const Eigen::Vector3d& scales);

/// Node propensities for the degree-corrected benchmarks: entries i.i.d.
/// uniform on (2, 3), then rescaled so the Euclidean norm equals
/// norm_target exactly.
Vector sample_degree_propensity(int n, double norm_target, std::uint64_t seed);

/// Rescales propensities so the maximum inside each community is 1 and
/// absorbs the factors into the connectivity matrices; edge probabilities
/// are unchanged. Throws if a rescaled connectivity entry leaves [0, 1].
BlockModelSpec with_unit_max_propensity(const BlockModelSpec& spec);

// Eigenvalue scales of the two connectivity matrices used by the coverage
// and bias benchmarks, and the flatter pair used by the multiple-testing
// benchmark.
inline Eigen::Vector3d benchmark_scales_a() { return {1.5, 0.2, 0.5}; }
inline Eigen::Vector3d benchmark_scales_b() { return {1.5, 0.2, -0.5}; }
inline Eigen::Vector3d benchmark_scales_c() { return {1.0, 0.4, 0.1}; }
inline Eigen::Vector3d benchmark_scales_d() { return {1.0, 0.4, -0.1}; }

/// Three-community benchmark with proportions (0.4, 0.3, 0.3): the first
/// half of the layers uses benchmark_connectivity(scales_a), the rest
/// scales_b. With propensity_norm engaged the model is degree-corrected
/// with propensities drawn via sample_degree_propensity(n, *, psi_seed).
BlockModelSpec benchmark_spec(int n, int L, double rho,
                              const Eigen::Vector3d& scales_a,
                              const Eigen::Vector3d& scales_b,
                              std::optional<double> propensity_norm = {},
                              std::uint64_t psi_seed = 0);

/// Variant for the pairwise-testing benchmarks: layer 1 uses scales_a,
/// layer 2 uses scales_a with `offset` added to the (1,1) entry of the
/// connectivity matrix, layers 3..L/2+1 repeat layer 1's connectivity and
/// the remainder uses scales_b. Requires even L >= 4.
BlockModelSpec paired_difference_spec(int n, int L, double rho, double offset,
                                      std::optional<double> propensity_norm = {},
                                      std::uint64_t psi_seed = 0);

/// Propensity norm used by the degree-corrected benchmarks at a given n.
/// Only the calibrated sizes are defined; anything else throws.
double benchmark_propensity_norm(int n);

/// Diagnostics for the identifiability and signal assumptions.
struct AssumptionReport {
  double min_eigenvalue_rate = 0.0;  // lambda_min(sum_l B_l^2) / L
  bool aggregate_rank_deficient = false;
  double balance_low = 0.0;   // K * min_k n_k / n
  double balance_high = 0.0;  // K * max_k n_k / n
  Vector edge_variance;       // per layer: sum_{i,j} Q_l(i,j)(1 - Q_l(i,j))
  Vector propensity_balance;  // per community: K * ||phi_k||_2 / ||psi||_2
};

AssumptionReport check_assumptions(const BlockModelSpec& spec);

}  // namespace scce
