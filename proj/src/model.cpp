#include "scce/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scce {

int vec_index(int s, int t, int K) {
  if (s < 1 || t < s || t > K) {
    throw std::out_of_range("vec_index: need 1 <= s <= t <= K, got s=" +
                            std::to_string(s) + " t=" + std::to_string(t) +
                            " K=" + std::to_string(K));
  }
  return (2 * s + t * (t - 1)) / 2;
}

Matrix symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("symmetrized: matrix is not square");
  }
  return 0.5 * (m + m.transpose());
}

Vector vectorize_upper(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("vectorize_upper: matrix is not square");
  }
  const int K = static_cast<int>(m.rows());
  Vector v(vec_dim(K));
  int a = 0;
  for (int t = 0; t < K; ++t) {
    for (int s = 0; s <= t; ++s) {
      v(a++) = m(s, t);
    }
  }
  return v;
}

Matrix devectorize_upper(const Vector& v, int K) {
  if (v.size() != vec_dim(K)) {
    throw std::invalid_argument(
        "devectorize_upper: vector length " + std::to_string(v.size()) +
        " does not match K(K+1)/2 = " + std::to_string(vec_dim(K)));
  }
  Matrix m(K, K);
  int a = 0;
  for (int t = 0; t < K; ++t) {
    for (int s = 0; s <= t; ++s) {
      m(s, t) = v(a);
      m(t, s) = v(a);
      ++a;
    }
  }
  return m;
}

double frobenius_from_upper(const Vector& v, int K) {
  if (v.size() != vec_dim(K)) {
    throw std::invalid_argument("frobenius_from_upper: length mismatch");
  }
  double sum = 0.0;
  int a = 0;
  for (int t = 0; t < K; ++t) {
    for (int s = 0; s <= t; ++s) {
      const double w = (s == t) ? 1.0 : 2.0;
      sum += w * v(a) * v(a);
      ++a;
    }
  }
  return std::sqrt(sum);
}

Vector degree_diagonal(const AdjacencyMatrix& a) {
  const int n = static_cast<int>(a.rows());
  Vector d(n);
  for (int i = 0; i < n; ++i) {
    long s = 0;
    for (int j = 0; j < n; ++j) s += a(i, j);
    d(i) = static_cast<double>(s);
  }
  return d;
}

Vector degree_diagonal(const Matrix& a) { return a.rowwise().sum(); }

MultiLayerNetwork MultiLayerNetwork::from_layers(
    std::vector<AdjacencyMatrix> layers) {
  if (layers.empty()) {
    throw std::invalid_argument("network: at least one layer is required");
  }
  const auto n = layers.front().rows();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& a = layers[l];
    const std::string where = "network: layer " + std::to_string(l + 1);
    if (a.rows() != a.cols() || a.rows() != n) {
      throw std::invalid_argument(where + " is not square of shared size");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a(i, i) != 0) {
        throw std::invalid_argument(where + " has a nonzero diagonal");
      }
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (a(i, j) > 1 || a(j, i) > 1) {
          throw std::invalid_argument(where + " has entries outside {0,1}");
        }
        if (a(i, j) != a(j, i)) {
          throw std::invalid_argument(where + " is not symmetric");
        }
      }
    }
  }
  MultiLayerNetwork net;
  net.node_count = static_cast<int>(n);
  net.layers = std::move(layers);
  return net;
}

Matrix MultiLayerNetwork::layer_as_real(int l) const {
  return layers.at(static_cast<std::size_t>(l)).cast<double>();
}

double BlockModelSpec::edge_probability(int l, int i, int j) const {
  const auto& b = connectivity[static_cast<std::size_t>(l)];
  return sparsity * propensity(i) * propensity(j) *
         b(membership[static_cast<std::size_t>(i)],
           membership[static_cast<std::size_t>(j)]);
}

Eigen::VectorXi BlockModelSpec::community_sizes() const {
  Eigen::VectorXi sizes = Eigen::VectorXi::Zero(community_count);
  for (int g : membership) sizes(g) += 1;
  return sizes;
}

Matrix BlockModelSpec::membership_matrix() const {
  Matrix theta = Matrix::Zero(node_count(), community_count);
  for (int i = 0; i < node_count(); ++i) {
    theta(i, membership[static_cast<std::size_t>(i)]) = 1.0;
  }
  return theta;
}

Vector BlockModelSpec::effective_sizes() const {
  Vector sizes = Vector::Zero(community_count);
  for (int i = 0; i < node_count(); ++i) {
    const double p = propensity(i);
    sizes(membership[static_cast<std::size_t>(i)]) += p * p;
  }
  return sizes;
}

void BlockModelSpec::validate() const {
  if (community_count < 1) {
    throw std::invalid_argument("model: community_count must be >= 1");
  }
  if (membership.empty()) {
    throw std::invalid_argument("model: membership is empty");
  }
  if (connectivity.empty()) {
    throw std::invalid_argument("model: connectivity list is empty");
  }
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("model: sparsity must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < membership.size(); ++i) {
    if (membership[i] < 0 || membership[i] >= community_count) {
      throw std::invalid_argument("model: node " + std::to_string(i + 1) +
                                  " has label outside 1..K");
    }
  }
  const Eigen::VectorXi sizes = community_sizes();
  for (int k = 0; k < community_count; ++k) {
    if (sizes(k) == 0) {
      throw std::invalid_argument("model: community " + std::to_string(k + 1) +
                                  " is empty");
    }
  }
  for (std::size_t l = 0; l < connectivity.size(); ++l) {
    const auto& b = connectivity[l];
    if (b.rows() != community_count || b.cols() != community_count) {
      throw std::invalid_argument("model: connectivity matrix " +
                                  std::to_string(l + 1) + " is not K x K");
    }
    if ((b - b.transpose()).cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("model: connectivity matrix " +
                                  std::to_string(l + 1) + " is not symmetric");
    }
    if (b.minCoeff() < 0.0 || b.maxCoeff() > 1.0) {
      throw std::invalid_argument("model: connectivity matrix " +
                                  std::to_string(l + 1) +
                                  " has entries outside [0, 1]");
    }
  }
  if (degree_corrected()) {
    if (degree_propensity.size() != node_count()) {
      throw std::invalid_argument(
          "model: degree_propensity length does not match node count");
    }
    if (degree_propensity.minCoeff() <= 0.0) {
      throw std::invalid_argument(
          "model: degree_propensity entries must be positive");
    }
  }
  // Probability bound: the largest pairwise propensity product per community
  // pair bounds every edge probability, so a K x K check suffices.
  Vector max_prop = Vector::Zero(community_count);
  for (int i = 0; i < node_count(); ++i) {
    const int g = membership[static_cast<std::size_t>(i)];
    max_prop(g) = std::max(max_prop(g), propensity(i));
  }
  for (std::size_t l = 0; l < connectivity.size(); ++l) {
    const auto& b = connectivity[l];
    for (int k = 0; k < community_count; ++k) {
      for (int k2 = k; k2 < community_count; ++k2) {
        const double p = sparsity * max_prop(k) * max_prop(k2) * b(k, k2);
        if (p > 1.0) {
          throw std::invalid_argument(
              "model: edge probability exceeds 1 for community pair (" +
              std::to_string(k + 1) + ", " + std::to_string(k2 + 1) +
              ") in layer " + std::to_string(l + 1));
        }
      }
    }
  }
}

std::vector<int> BlockModelSpec::membership_from_proportions(
    int n, const std::vector<double>& proportions) {
  if (n < 1 || proportions.empty()) {
    throw std::invalid_argument("membership: need n >= 1 and proportions");
  }
  const int K = static_cast<int>(proportions.size());
  double total = 0.0;
  for (double p : proportions) {
    if (p <= 0.0) {
      throw std::invalid_argument("membership: proportions must be positive");
    }
    total += p;
  }
  // Largest-remainder rounding of n * p_k / total.
  std::vector<int> sizes(static_cast<std::size_t>(K));
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int k = 0; k < K; ++k) {
    const double exact = n * proportions[static_cast<std::size_t>(k)] / total;
    sizes[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(exact));
    assigned += sizes[static_cast<std::size_t>(k)];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int r = 0; r < n - assigned; ++r) {
    sizes[static_cast<std::size_t>(remainders[static_cast<std::size_t>(r) %
                                              remainders.size()]
                                       .second)] += 1;
  }
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < K; ++k) {
    labels.insert(labels.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(k)]),
                  k);
  }
  if (static_cast<int>(labels.size()) != n) {
    throw std::logic_error("membership: size rounding failed");
  }
  return labels;
}

}  // namespace scce
