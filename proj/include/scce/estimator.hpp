#pragma once

#include "scce/embedding.hpp"
#include "scce/generator.hpp"
#include "scce/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace scce {

/// Per-layer symmetric K x K score estimates M_hat_l = U_hat^T A_l U_hat.
struct ScoreEstimate {
  std::vector<Matrix> scores;
  int dimension = 0;

  int layer_count() const { return static_cast<int>(scores.size()); }
};

ScoreEstimate estimate_scores(const MultiLayerNetwork& net,
                              const EigenspaceEstimate& embedding);

/// Real-valued overload for noiseless pipelines where the "layers" are
/// expected adjacency matrices.
ScoreEstimate estimate_scores(const std::vector<Matrix>& layers,
                              const EigenspaceEstimate& embedding);

/// Best orthogonal alignment of an estimated basis to a reference basis:
/// the polar factor of reference^T * estimate, which minimizes
/// ||reference^T estimate - Z||_F over the orthogonal group. residual is
/// that minimal distance. Throws std::invalid_argument when the cross
/// product is numerically rank deficient (alignment not identified).
struct AlignmentResult {
  Matrix rotation;  // K x K orthogonal
  double residual = 0.0;
};

AlignmentResult procrustes_align(const Matrix& reference,
                                 const Matrix& estimate);

/// Covariance of the vectorized score fluctuation for one layer, a
/// d x d matrix with d = K(K+1)/2 indexed via vec_index. Entries follow
///   sum_{i<j} (V_is V_jt + V_js V_it)(V_is' V_jt' + V_js' V_it')
///             * Q(i,j)(1 - Q(i,j))
/// accumulated with compensated summation and repaired to be positive
/// semidefinite (symmetric eigenvalue floor at zero).
struct CovarianceEstimate {
  Matrix matrix;  // d x d
  int layer = 0;
  int dimension = 0;  // K
};

/// Population covariance: exact basis and Q_l from the decomposition.
CovarianceEstimate population_covariance(const PopulationDecomposition& pop,
                                         int l);

/// Plug-in covariance: V = U_hat and Q_hat_l = clip(U_hat M_hat_l U_hat^T)
/// to [0, 1]. This is the version available without ground truth.
CovarianceEstimate estimate_covariance(const EigenspaceEstimate& embedding,
                                       const ScoreEstimate& scores, int l);

/// Shared kernel behind both covariance routines; exposed for testing.
Matrix score_covariance_from_probabilities(const Matrix& basis,
                                           const Matrix& probabilities,
                                           int layer_for_errors);

/// Eigenvalue floor at zero (symmetric part first); returns the nearest
/// positive semidefinite matrix in that spectral sense.
Matrix psd_floor(const Matrix& m);

/// Centered noise matrix of one layer: A_l - P_l where P_l = Q_l with the
/// diagonal removed (the hollow population mean of the sampled layer).
Matrix noise_matrix(const MultiLayerNetwork& net, const Matrix& population,
                    int l);

/// Bias residual of one layer,
///   E_l = M_hat_l - Z^T M_l Z - Z^T (U^T G_l U) Z,
/// i.e. what is left of the score error after removing the rotated truth
/// and the linear noise term.
Matrix bias_residual(const Matrix& score_hat, const Matrix& score_pop,
                     const Matrix& rotation, const Matrix& basis_pop,
                     const Matrix& noise);

/// Frobenius norms of the per-layer bias residuals of a fitted network,
/// given the generating model. Pipelines without ground truth cannot call
/// this (the population decomposition is required).
struct BiasReport {
  std::vector<double> frobenius;  // per layer
  double mean = 0.0;

  int layer_count() const { return static_cast<int>(frobenius.size()); }
};

BiasReport extract_bias(const ScoreEstimate& scores,
                        const PopulationDecomposition& pop,
                        const AlignmentResult& alignment,
                        const MultiLayerNetwork& net);

/// Structural terms of the estimation-error rate bounds (constants dropped).
double sbm_bias_bound(int n, int L, double rho);
double dcsbm_bias_bound(int n, int L, double rho, double propensity_norm);

/// Measured mean bias against the structural bound term over a parameter
/// grid of the benchmark family; ratio = measured / bound.
struct BoundGridPoint {
  int n = 0;
  int L = 0;
  double rho = 0.0;
  std::optional<double> propensity_norm;  // engaged => degree-corrected run
};

struct BoundGridRow {
  BoundGridPoint point;
  double measured_bias = 0.0;
  double bound_term = 0.0;
  double ratio = 0.0;
};

struct BoundGridReport {
  std::vector<BoundGridRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

BoundGridReport bound_grid_report(const std::vector<BoundGridPoint>& grid,
                                        int reps, std::uint64_t seed);

}  // namespace scce
