#include "scce/embedding.hpp"

#include "scce/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scce {

namespace {

using MatrixF = Eigen::MatrixXf;

// Entries of sum_l A_l^2 are integers bounded by n * L. As long as that
// bound stays below 2^24 every single-precision partial sum is exact, so
// the float accumulation is a pure speed trick; guard so silent rounding
// is impossible on oversized inputs.
void check_exact_float_range(int n, int L) {
  if (static_cast<double>(n) * L > 16777216.0) {
    throw std::invalid_argument(
        "aggregate: network too large for exact single-precision "
        "accumulation (n=" + std::to_string(n) + ", L=" + std::to_string(L) +
        ")");
  }
}

Matrix sum_of_squares(const MultiLayerNetwork& net) {
  const int n = net.node_count;
  check_exact_float_range(n, net.layer_count());
  MatrixF acc = MatrixF::Zero(n, n);
  MatrixF layer(n, n);
  for (const auto& a : net.layers) {
    layer = a.cast<float>();
    acc.selfadjointView<Eigen::Lower>().rankUpdate(layer, 1.0f);
  }
  Matrix full = acc.cast<double>();
  full.triangularView<Eigen::StrictlyUpper>() =
      full.transpose().triangularView<Eigen::StrictlyUpper>();
  return full;
}

// Deterministic eigenpair ordering: magnitude descending, then algebraic
// value descending, then original index.
std::vector<int> magnitude_order(const Vector& values) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(values(a));
    const double mb = std::abs(values(b));
    if (ma != mb) return ma > mb;
    if (values(a) != values(b)) return values(a) > values(b);
    return a < b;
  });
  return order;
}

// Algebraic ordering: value descending, then original index.
std::vector<int> algebraic_order(const Vector& values) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (values(a) != values(b)) return values(a) > values(b);
    return a < b;
  });
  return order;
}

void fix_column_signs(Matrix& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      const double m = std::abs(basis(r, c));
      if (m > best) {
        best = m;
        pivot = r;
      }
    }
    if (basis(pivot, c) < 0.0) {
      basis.col(c) = -basis.col(c);
    }
  }
}

Eigen::SelfAdjointEigenSolver<Matrix> solve_symmetric(const Matrix& m,
                                                      const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error(std::string(what) +
                             ": eigendecomposition did not converge (n=" +
                             std::to_string(m.rows()) + ")");
  }
  return es;
}

}  // namespace

Matrix aggregate_bias_adjusted(const MultiLayerNetwork& net) {
  Matrix full = sum_of_squares(net);
  const int n = net.node_count;
  Vector total_degree = Vector::Zero(n);
  for (const auto& a : net.layers) {
    total_degree += degree_diagonal(a);
  }
  full.diagonal() -= total_degree;  // (A^2)_ii == degree, so this lands on 0
  return full;
}

Matrix aggregate_squares(const MultiLayerNetwork& net) {
  return sum_of_squares(net);
}

Matrix aggregate_squares(const std::vector<Matrix>& layers) {
  if (layers.empty()) {
    throw std::invalid_argument("aggregate: no layers");
  }
  const auto n = layers.front().rows();
  Matrix acc = Matrix::Zero(n, n);
  for (const auto& a : layers) {
    if (a.rows() != n || a.cols() != n) {
      throw std::invalid_argument("aggregate: layer size mismatch");
    }
    acc.noalias() += a * a;
  }
  return acc;
}

EigenspaceEstimate leading_eigenspace(const Matrix& aggregate, int K,
                                      EmbeddingMethod method,
                                      SpectrumSelection selection) {
  if (aggregate.rows() != aggregate.cols()) {
    throw std::invalid_argument("leading_eigenspace: matrix is not square");
  }
  const int n = static_cast<int>(aggregate.rows());
  if (K < 1 || K > n) {
    throw std::invalid_argument("leading_eigenspace: need 1 <= K <= n, got K=" +
                                std::to_string(K) + " n=" + std::to_string(n));
  }
  const auto es = solve_symmetric(symmetrized(aggregate), "leading_eigenspace");
  const Vector values = es.eigenvalues();
  const bool by_magnitude = selection == SpectrumSelection::kLargestMagnitude;
  const std::vector<int> order =
      by_magnitude ? magnitude_order(values) : algebraic_order(values);

  EigenspaceEstimate out;
  out.method = method;
  out.basis = Matrix(n, K);
  out.eigenvalues = Vector(K);
  for (int k = 0; k < K; ++k) {
    out.basis.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    out.eigenvalues(k) = values(order[static_cast<std::size_t>(k)]);
  }
  fix_column_signs(out.basis);
  if (K < n) {
    const double kept = out.eigenvalues(K - 1);
    const double next = values(order[static_cast<std::size_t>(K)]);
    const double gap = by_magnitude ? std::abs(std::abs(kept) - std::abs(next))
                                    : kept - next;
    out.eigengap_ambiguous = gap <= 1e-9;
  }
  return out;
}

Vector scree_values(const Matrix& aggregate, int n) {
  if (n < 1) {
    throw std::invalid_argument("scree_values: need n >= 1");
  }
  const auto es = solve_symmetric(symmetrized(aggregate) / n, "scree_values");
  const Vector values = es.eigenvalues();
  const std::vector<int> order = magnitude_order(values);
  Vector out(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    out(k) = values(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

EigenspaceEstimate mase_eigenspace(const MultiLayerNetwork& net, int K) {
  const int n = net.node_count;
  const int L = net.layer_count();
  if (K < 1 || K > n) {
    throw std::invalid_argument("mase_eigenspace: need 1 <= K <= n");
  }
  Matrix concat(n, static_cast<Eigen::Index>(L) * K);
  for (int l = 0; l < L; ++l) {
    const auto es = solve_symmetric(net.layer_as_real(l), "mase_eigenspace");
    const Vector values = es.eigenvalues();
    const std::vector<int> order = magnitude_order(values);
    Matrix block(n, K);
    for (int k = 0; k < K; ++k) {
      block.col(k) = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
    fix_column_signs(block);
    concat.middleCols(static_cast<Eigen::Index>(l) * K, K) = block;
  }
  Matrix gram(n, n);
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(concat, 1.0);
  gram.triangularView<Eigen::StrictlyUpper>() =
      gram.transpose().triangularView<Eigen::StrictlyUpper>();
  return leading_eigenspace(gram, K, EmbeddingMethod::kMase);
}

namespace {

int count_distinct_rows(const Matrix& rows) {
  std::vector<int> order(static_cast<std::size_t>(rows.rows()));
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](int a, int b) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (rows(a, c) != rows(b, c)) return rows(a, c) < rows(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  int distinct = rows.rows() > 0 ? 1 : 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

double lloyd_iterations(const Matrix& points, Matrix& centers,
                        std::vector<int>& labels) {
  const int n = static_cast<int>(points.rows());
  const int K = static_cast<int>(centers.rows());
  double wcss = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    wcss = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        const double d = (points.row(i) - centers.row(k)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
      wcss += best_d;
    }
    Matrix sums = Matrix::Zero(K, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(K), 0);
    for (int i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]++;
    }
    for (int k = 0; k < K; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        centers.row(k) = sums.row(k) / counts[static_cast<std::size_t>(k)];
      } else {
        // Re-seed an empty cluster at the point farthest from its center.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              (points.row(i) -
               centers.row(labels[static_cast<std::size_t>(i)]))
                  .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers.row(k) = points.row(far);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return wcss;
}

}  // namespace

std::vector<int> cluster_communities(const EigenspaceEstimate& embedding,
                                     int K, std::uint64_t seed,
                                     bool normalize_rows) {
  const Matrix& basis = embedding.basis;
  const int n = static_cast<int>(basis.rows());
  if (K < 1 || K > n) {
    throw std::invalid_argument("cluster_communities: need 1 <= K <= n");
  }
  Matrix points = basis;
  if (normalize_rows) {
    for (int i = 0; i < n; ++i) {
      const double norm = points.row(i).norm();
      if (norm > 0.0) points.row(i) /= norm;
    }
  }
  if (count_distinct_rows(points) < K) {
    throw std::invalid_argument(
        "cluster_communities: fewer than K distinct embedding rows");
  }

  std::vector<int> best_labels;
  double best_wcss = std::numeric_limits<double>::infinity();
  SequentialRng rng(keyed(seed, stream::kKmeans));
  for (int restart = 0; restart < 10; ++restart) {
    // k-means++ seeding.
    Matrix centers(K, points.cols());
    std::vector<double> dist(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
    int first = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    centers.row(0) = points.row(first);
    for (int k = 1; k < K; ++k) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = (points.row(i) - centers.row(k - 1)).squaredNorm();
        dist[static_cast<std::size_t>(i)] =
            std::min(dist[static_cast<std::size_t>(i)], d);
        total += dist[static_cast<std::size_t>(i)];
      }
      int chosen = n - 1;
      if (total > 0.0) {
        const double target = rng.next_uniform01() * total;
        double running = 0.0;
        for (int i = 0; i < n; ++i) {
          running += dist[static_cast<std::size_t>(i)];
          if (running >= target) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      }
      centers.row(k) = points.row(chosen);
    }
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    const double wcss = lloyd_iterations(points, centers, labels);
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_labels = labels;
    }
  }
  return best_labels;
}

}  // namespace scce
