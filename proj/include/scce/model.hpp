#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace scce {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Layers are plain {0,1} matrices; storing them as bytes keeps a hundred
// 500x500 layers cheap and lets the aggregation step run in single precision
// without rounding (all intermediate values are small integers).
using AdjacencyMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Length of the upper-triangular vectorization of a K x K symmetric matrix.
inline int vec_dim(int K) { return K * (K + 1) / 2; }

/// 1-based position of entry (s, t), 1 <= s <= t <= K, in the column-wise
/// upper-triangular vectorization: (2s + t(t - 1)) / 2.
/// Throws std::out_of_range outside the triangle.
int vec_index(int s, int t, int K);

/// (m + m^T) / 2. Score and covariance matrices are passed through this so
/// downstream symmetry is exact rather than approximate.
Matrix symmetrized(const Matrix& m);

/// Column-wise upper triangle of a symmetric K x K matrix, ordered to match
/// vec_index: (1,1), (1,2), (2,2), (1,3), (2,3), (3,3), ...
Vector vectorize_upper(const Matrix& m);

/// Inverse of vectorize_upper; mirrors the triangle into a full matrix.
Matrix devectorize_upper(const Vector& v, int K);

/// Frobenius norm of the symmetric matrix whose upper triangle is v
/// (off-diagonal entries counted twice), without materializing the matrix.
double frobenius_from_upper(const Vector& v, int K);

/// Row sums of an adjacency matrix, i.e. the diagonal of D.
Vector degree_diagonal(const AdjacencyMatrix& a);
Vector degree_diagonal(const Matrix& a);

/// L symmetric hollow binary adjacency matrices on a shared node set.
struct MultiLayerNetwork {
  int node_count = 0;
  std::vector<AdjacencyMatrix> layers;

  int layer_count() const { return static_cast<int>(layers.size()); }

  /// Builds a network after checking each layer is square of equal size,
  /// symmetric, zero on the diagonal and {0,1}-valued.
  /// Throws std::invalid_argument naming the offending layer.
  static MultiLayerNetwork from_layers(std::vector<AdjacencyMatrix> layers);

  Matrix layer_as_real(int l) const;
};

/// Parameters of a multilayer (degree-corrected) stochastic block model:
/// K communities, per-layer K x K connectivity, a global sparsity factor and
/// optional node propensities.
struct BlockModelSpec {
  int community_count = 0;           // K
  std::vector<int> membership;       // 0-based community labels, one per node
  std::vector<Matrix> connectivity;  // L matrices, entries in [0, 1]
  double sparsity = 1.0;             // rho
  Vector degree_propensity;          // psi; size 0 means the plain block model

  int node_count() const { return static_cast<int>(membership.size()); }
  int layer_count() const { return static_cast<int>(connectivity.size()); }
  bool degree_corrected() const { return degree_propensity.size() > 0; }

  double propensity(int i) const {
    return degree_corrected() ? degree_propensity(i) : 1.0;
  }

  /// Edge probability for the unordered pair (i, j) in layer l (0-based).
  double edge_probability(int l, int i, int j) const;

  Eigen::VectorXi community_sizes() const;

  /// n x K one-hot membership matrix.
  Matrix membership_matrix() const;

  /// Squared norms of the propensity vector restricted to each community;
  /// reduces to the plain community sizes when there are no propensities.
  Vector effective_sizes() const;

  /// Throws std::invalid_argument describing the first violated constraint
  /// (dimensions, label range, connectivity range, probability bound,
  /// empty community, non-positive propensity).
  void validate() const;

  /// Community labels for n nodes from target proportions, rounded by
  /// largest remainder so sizes sum to n exactly; labels come out as
  /// contiguous blocks 0,..,0,1,..,1,...
  static std::vector<int> membership_from_proportions(
      int n, const std::vector<double>& proportions);
};

}  // namespace scce
