#include "scce/estimator.hpp"

#include "scce/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>

namespace scce {

namespace {

Matrix project_scores(const Matrix& layer, const Matrix& basis) {
  Matrix tmp = layer * basis;
  return symmetrized(basis.transpose() * tmp);
}

void check_embedding(const EigenspaceEstimate& embedding, Eigen::Index n,
                     const char* what) {
  if (embedding.basis.rows() != n) {
    throw std::invalid_argument(std::string(what) +
                                ": embedding size does not match network");
  }
}

}  // namespace

ScoreEstimate estimate_scores(const MultiLayerNetwork& net,
                              const EigenspaceEstimate& embedding) {
  check_embedding(embedding, net.node_count, "estimate_scores");
  ScoreEstimate out;
  out.dimension = embedding.dimension();
  out.scores.reserve(net.layers.size());
  for (int l = 0; l < net.layer_count(); ++l) {
    out.scores.push_back(project_scores(net.layer_as_real(l), embedding.basis));
  }
  return out;
}

ScoreEstimate estimate_scores(const std::vector<Matrix>& layers,
                              const EigenspaceEstimate& embedding) {
  if (layers.empty()) {
    throw std::invalid_argument("estimate_scores: no layers");
  }
  check_embedding(embedding, layers.front().rows(), "estimate_scores");
  ScoreEstimate out;
  out.dimension = embedding.dimension();
  out.scores.reserve(layers.size());
  for (const auto& a : layers) {
    out.scores.push_back(project_scores(a, embedding.basis));
  }
  return out;
}

AlignmentResult procrustes_align(const Matrix& reference,
                                 const Matrix& estimate) {
  if (reference.rows() != estimate.rows() ||
      reference.cols() != estimate.cols()) {
    throw std::invalid_argument("procrustes_align: shape mismatch");
  }
  const Matrix cross = reference.transpose() * estimate;
  Eigen::JacobiSVD<Matrix> svd(cross,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    throw std::invalid_argument(
        "procrustes_align: cross product is rank deficient, alignment is "
        "not identified");
  }
  AlignmentResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.residual = (cross - out.rotation).norm();
  return out;
}

Matrix psd_floor(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("psd_floor: eigendecomposition did not converge");
  }
  Vector values = es.eigenvalues().cwiseMax(0.0);
  return symmetrized(es.eigenvectors() * values.asDiagonal() *
                     es.eigenvectors().transpose());
}

Matrix score_covariance_from_probabilities(const Matrix& basis,
                                           const Matrix& probabilities,
                                           int layer_for_errors) {
  const Eigen::Index n = basis.rows();
  const int K = static_cast<int>(basis.cols());
  if (probabilities.rows() != n || probabilities.cols() != n) {
    throw std::invalid_argument("score covariance: probability matrix must "
                                "be n x n for layer " +
                                std::to_string(layer_for_errors + 1));
  }
  if (probabilities.minCoeff() < 0.0 || probabilities.maxCoeff() > 1.0) {
    throw std::invalid_argument("score covariance: probabilities outside "
                                "[0, 1] for layer " +
                                std::to_string(layer_for_errors + 1));
  }
  const int d = vec_dim(K);
  const int pairs = d * (d + 1) / 2;
  std::vector<double> acc(static_cast<std::size_t>(pairs), 0.0);
  std::vector<double> comp(static_cast<std::size_t>(pairs), 0.0);
  std::vector<double> h(static_cast<std::size_t>(d));
  std::vector<double> hw(static_cast<std::size_t>(d));

  // Row access is the hot path; transpose once so node vectors are columns.
  const Matrix basis_t = basis.transpose();

  // Deterministic accumulation order: i-major, j-minor, with compensated
  // summation so thread count or blocking cannot change the result.
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double* ui = basis_t.col(i).data();
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double q = probabilities(i, j);
      const double w = q * (1.0 - q);
      if (w == 0.0) continue;
      const double* uj = basis_t.col(j).data();
      int a = 0;
      for (int t = 0; t < K; ++t) {
        for (int s = 0; s <= t; ++s) {
          h[static_cast<std::size_t>(a)] = ui[s] * uj[t] + uj[s] * ui[t];
          hw[static_cast<std::size_t>(a)] = h[static_cast<std::size_t>(a)] * w;
          ++a;
        }
      }
      int m = 0;
      for (int x = 0; x < d; ++x) {
        const double hx = hw[static_cast<std::size_t>(x)];
        for (int y = x; y < d; ++y) {
          const double term = hx * h[static_cast<std::size_t>(y)];
          // Kahan step.
          const double adj = term - comp[static_cast<std::size_t>(m)];
          const double next = acc[static_cast<std::size_t>(m)] + adj;
          comp[static_cast<std::size_t>(m)] =
              (next - acc[static_cast<std::size_t>(m)]) - adj;
          acc[static_cast<std::size_t>(m)] = next;
          ++m;
        }
      }
    }
  }

  Matrix sigma(d, d);
  int m = 0;
  for (int x = 0; x < d; ++x) {
    for (int y = x; y < d; ++y) {
      sigma(x, y) = acc[static_cast<std::size_t>(m)];
      sigma(y, x) = acc[static_cast<std::size_t>(m)];
      ++m;
    }
  }
  return psd_floor(sigma);
}

CovarianceEstimate population_covariance(const PopulationDecomposition& pop,
                                         int l) {
  CovarianceEstimate out;
  out.layer = l;
  out.dimension = static_cast<int>(pop.basis.cols());
  out.matrix = score_covariance_from_probabilities(
      pop.basis, pop.population_matrix(l), l);
  return out;
}

CovarianceEstimate estimate_covariance(const EigenspaceEstimate& embedding,
                                       const ScoreEstimate& scores, int l) {
  if (l < 0 || l >= scores.layer_count()) {
    throw std::out_of_range("estimate_covariance: layer index out of range");
  }
  if (scores.dimension != embedding.dimension()) {
    throw std::invalid_argument(
        "estimate_covariance: embedding and scores disagree on K");
  }
  // Plug-in probabilities, clipped into [0, 1] entrywise.
  Matrix probs = embedding.basis *
                 scores.scores[static_cast<std::size_t>(l)] *
                 embedding.basis.transpose();
  probs = probs.cwiseMax(0.0).cwiseMin(1.0);
  CovarianceEstimate out;
  out.layer = l;
  out.dimension = embedding.dimension();
  out.matrix =
      score_covariance_from_probabilities(embedding.basis, probs, l);
  return out;
}

Matrix noise_matrix(const MultiLayerNetwork& net, const Matrix& population,
                    int l) {
  if (population.rows() != net.node_count ||
      population.cols() != net.node_count) {
    throw std::invalid_argument("noise_matrix: population size mismatch");
  }
  Matrix hollow = population;
  hollow.diagonal().setZero();
  return net.layer_as_real(l) - hollow;
}

Matrix bias_residual(const Matrix& score_hat, const Matrix& score_pop,
                     const Matrix& rotation, const Matrix& basis_pop,
                     const Matrix& noise) {
  const Matrix projected_noise =
      basis_pop.transpose() * noise * basis_pop;
  return symmetrized(score_hat -
                     rotation.transpose() * score_pop * rotation -
                     rotation.transpose() * projected_noise * rotation);
}

BiasReport extract_bias(const ScoreEstimate& scores,
                        const PopulationDecomposition& pop,
                        const AlignmentResult& alignment,
                        const MultiLayerNetwork& net) {
  if (scores.layer_count() != pop.layer_count() ||
      scores.layer_count() != net.layer_count()) {
    throw std::invalid_argument(
        "extract_bias: ground truth does not match the fitted network "
        "(layer counts differ)");
  }
  if (pop.basis.rows() != net.node_count) {
    throw std::invalid_argument(
        "extract_bias: ground truth does not match the fitted network "
        "(node counts differ)");
  }
  BiasReport report;
  report.frobenius.reserve(scores.scores.size());
  double total = 0.0;
  for (int l = 0; l < scores.layer_count(); ++l) {
    const Matrix noise = noise_matrix(net, pop.population_matrix(l), l);
    const Matrix residual = bias_residual(
        scores.scores[static_cast<std::size_t>(l)],
        pop.scores[static_cast<std::size_t>(l)], alignment.rotation,
        pop.basis, noise);
    const double f = residual.norm();
    report.frobenius.push_back(f);
    total += f;
  }
  report.mean = total / scores.layer_count();
  return report;
}

double sbm_bias_bound(int n, int L, double rho) {
  return rho + std::sqrt(std::log(static_cast<double>(L) + n) / L);
}

double dcsbm_bias_bound(int n, int L, double rho, double propensity_norm) {
  const double norm4 = std::pow(propensity_norm, 4.0);
  const double first = static_cast<double>(n) * n *
                       std::sqrt(std::log(static_cast<double>(L) + n)) /
                       (std::sqrt(static_cast<double>(L)) * norm4);
  const double second =
      std::max(std::pow(static_cast<double>(n), 1.5) * std::sqrt(rho) / norm4,
               rho);
  return first + second;
}

BoundGridReport bound_grid_report(const std::vector<BoundGridPoint>& grid,
                                        int reps, std::uint64_t seed) {
  if (grid.empty() || reps < 1) {
    throw std::invalid_argument("bound_grid_report: empty grid or reps < 1");
  }
  BoundGridReport report;
  report.rows.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& pt = grid[g];
    const std::uint64_t point_seed = keyed(seed, stream::kReplication, g);
    double total = 0.0;
    for (int r = 0; r < reps; ++r) {
      const std::uint64_t rep_seed =
          keyed(point_seed, static_cast<std::uint64_t>(r));
      const BlockModelSpec spec = benchmark_spec(
          pt.n, pt.L, pt.rho, benchmark_scales_a(), benchmark_scales_b(),
          pt.propensity_norm, rep_seed);
      const PopulationDecomposition pop = population_decomposition(spec);
      const MultiLayerNetwork net = sample_network(spec, rep_seed);
      const EigenspaceEstimate emb =
          leading_eigenspace(aggregate_bias_adjusted(net), 3);
      const ScoreEstimate scores = estimate_scores(net, emb);
      const AlignmentResult align = procrustes_align(pop.basis, emb.basis);
      total += extract_bias(scores, pop, align, net).mean;
    }
    BoundGridRow row;
    row.point = pt;
    row.measured_bias = total / reps;
    row.bound_term = pt.propensity_norm
                         ? dcsbm_bias_bound(pt.n, pt.L, pt.rho,
                                            *pt.propensity_norm)
                         : sbm_bias_bound(pt.n, pt.L, pt.rho);
    row.ratio = row.measured_bias / row.bound_term;
    report.rows.push_back(row);
  }
  report.min_ratio = report.rows.front().ratio;
  report.max_ratio = report.rows.front().ratio;
  for (const auto& row : report.rows) {
    report.min_ratio = std::min(report.min_ratio, row.ratio);
    report.max_ratio = std::max(report.max_ratio, row.ratio);
  }
  return report;
}

}  // namespace scce
