#pragma once

#include "scce/model.hpp"

#include <cstdint>
#include <vector>

namespace scce {

enum class EmbeddingMethod { kAggregate, kMase };

/// How the K retained eigenpairs are picked from a symmetric spectrum.
///
/// The aggregate sum_l (A_l^2 - D_l) is positive semidefinite in
/// population, so its leading directions are the largest *algebraic*
/// eigenvalues. Sampling noise spreads a roughly symmetric bulk around
/// zero whose negative edge can out-magnitude the smallest signal
/// eigenvalue; a magnitude rule would then trade a signal direction for
/// pure noise. Indefinite inputs (individual layers, whose population
/// eigenvalues carry signs) need the magnitude rule instead.
enum class SpectrumSelection { kLargestAlgebraic, kLargestMagnitude };

/// Basis estimate with the eigenvalues that produced it, ordered by the
/// selection rule that picked them. eigengap_ambiguous is set when the
/// K-th and (K+1)-th eigenvalues are numerically tied under that rule,
/// i.e. the retained subspace is not well defined.
struct EigenspaceEstimate {
  Matrix basis;  // n x K, orthonormal columns
  Vector eigenvalues;
  EmbeddingMethod method = EmbeddingMethod::kAggregate;
  bool eigengap_ambiguous = false;

  int dimension() const { return static_cast<int>(basis.cols()); }
};

/// Bias-adjusted aggregation sum_l (A_l^2 - D_l). The squares are
/// accumulated in single precision; every intermediate is a small integer,
/// so the result is exact, and the diagonal is exactly zero.
Matrix aggregate_bias_adjusted(const MultiLayerNetwork& net);

/// Plain sum of squared layers, sum_l A_l^2, without the degree adjustment.
/// This is the aggregate the scree diagnostic decomposes.
Matrix aggregate_squares(const MultiLayerNetwork& net);

/// Real-valued overload used when layers are expected matrices rather than
/// sampled networks (noiseless pipelines).
Matrix aggregate_squares(const std::vector<Matrix>& layers);

/// K leading eigenpairs of a symmetric matrix under the given selection
/// rule (algebraic for population-PSD aggregates, magnitude for indefinite
/// inputs; ties by the other criterion, then original position). Column
/// signs are fixed deterministically: the entry of largest magnitude
/// (lowest index on ties) is made non-negative.
EigenspaceEstimate leading_eigenspace(
    const Matrix& aggregate, int K,
    EmbeddingMethod method = EmbeddingMethod::kAggregate,
    SpectrumSelection selection = SpectrumSelection::kLargestAlgebraic);

/// All eigenvalues of aggregate / n in magnitude-descending order; the
/// elbow of this sequence is the usual dimension diagnostic.
Vector scree_values(const Matrix& aggregate, int n);

/// Baseline multiple-adjacency embedding: concatenate the K leading
/// eigenvectors of every layer into an n x (L K) matrix Y and return the K
/// leading eigenvectors of Y Y^T. The reported eigenvalues are those of
/// Y Y^T.
EigenspaceEstimate mase_eigenspace(const MultiLayerNetwork& net, int K);

/// K-means (k-means++ seeding, several restarts, best within-cluster sum
/// of squares) on the rows of the basis. With normalize_rows the rows are
/// scaled to unit norm first, the usual variant for degree-corrected
/// models. Labels are 0-based and only identified up to permutation.
/// Throws std::invalid_argument if fewer than K distinct rows exist.
std::vector<int> cluster_communities(const EigenspaceEstimate& embedding,
                                     int K, std::uint64_t seed,
                                     bool normalize_rows = false);

}  // namespace scce
