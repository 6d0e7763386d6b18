#include "scce/generator.hpp"

#include "scce/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scce {

Matrix PopulationDecomposition::population_matrix(int l) const {
  const auto& m = scores.at(static_cast<std::size_t>(l));
  return basis * m * basis.transpose();
}

MultiLayerNetwork sample_network(const BlockModelSpec& spec,
                                 std::uint64_t seed) {
  const int n = spec.node_count();
  const int L = spec.layer_count();
  std::vector<AdjacencyMatrix> layers(static_cast<std::size_t>(L));
  const std::uint64_t root = keyed(seed, stream::kEdges);
  for (int l = 0; l < L; ++l) {
    AdjacencyMatrix a = AdjacencyMatrix::Zero(n, n);
    const std::uint64_t layer_key = keyed(root, static_cast<std::uint64_t>(l));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double p = spec.edge_probability(l, i, j);
        if (p > 1.0) {
          throw std::invalid_argument(
              "sample_network: edge probability " + std::to_string(p) +
              " > 1 at layer " + std::to_string(l + 1) + ", pair (" +
              std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")");
        }
        const double u = uniform01(keyed(layer_key,
                                         static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(j)));
        if (u < p) {
          a(i, j) = 1;
          a(j, i) = 1;
        }
      }
    }
    layers[static_cast<std::size_t>(l)] = std::move(a);
  }
  MultiLayerNetwork net;
  net.node_count = n;
  net.layers = std::move(layers);
  return net;
}

PopulationDecomposition population_decomposition(const BlockModelSpec& spec) {
  const int n = spec.node_count();
  const int K = spec.community_count;
  const Vector sizes = spec.effective_sizes();
  for (int k = 0; k < K; ++k) {
    if (sizes(k) <= 0.0) {
      throw std::invalid_argument("population_decomposition: community " +
                                  std::to_string(k + 1) + " is empty");
    }
  }
  PopulationDecomposition pop;
  pop.basis = Matrix::Zero(n, K);
  for (int i = 0; i < n; ++i) {
    const int g = spec.membership[static_cast<std::size_t>(i)];
    pop.basis(i, g) = spec.propensity(i) / std::sqrt(sizes(g));
  }
  const Vector scale = sizes.cwiseSqrt();
  pop.scores.reserve(static_cast<std::size_t>(spec.layer_count()));
  for (int l = 0; l < spec.layer_count(); ++l) {
    Matrix m = spec.sparsity *
               (scale.asDiagonal() *
                spec.connectivity[static_cast<std::size_t>(l)] *
                scale.asDiagonal());
    pop.scores.push_back(symmetrized(m));
  }
  return pop;
}

Matrix population_matrix_direct(const BlockModelSpec& spec, int l) {
  const int n = spec.node_count();
  Matrix q(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double p = spec.edge_probability(l, i, j);
      q(i, j) = p;
      q(j, i) = p;
    }
  }
  return q;
}

Matrix benchmark_connectivity(const Eigen::Vector3d& scales) {
  const double h = 0.5;
  const double r = std::sqrt(2.0) / 2.0;
  Matrix w(3, 3);
  w << h, h, -r,
       h, h, r,
       r, -r, 0.0;
  Matrix b = symmetrized(w * scales.asDiagonal() * w.transpose());
  if (b.minCoeff() < 0.0 || b.maxCoeff() > 1.0) {
    throw std::invalid_argument(
        "benchmark_connectivity: scales put an entry outside [0, 1]");
  }
  return b;
}

Vector sample_degree_propensity(int n, double norm_target,
                                std::uint64_t seed) {
  if (n < 1 || norm_target <= 0.0) {
    throw std::invalid_argument(
        "sample_degree_propensity: need n >= 1 and a positive norm");
  }
  const std::uint64_t root = keyed(seed, stream::kPropensity);
  Vector psi(n);
  for (int i = 0; i < n; ++i) {
    psi(i) = 2.0 + uniform01(keyed(root, static_cast<std::uint64_t>(i)));
  }
  psi *= norm_target / psi.norm();
  return psi;
}

BlockModelSpec with_unit_max_propensity(const BlockModelSpec& spec) {
  if (!spec.degree_corrected()) {
    return spec;
  }
  const int K = spec.community_count;
  Vector max_prop = Vector::Zero(K);
  for (int i = 0; i < spec.node_count(); ++i) {
    const int g = spec.membership[static_cast<std::size_t>(i)];
    max_prop(g) = std::max(max_prop(g), spec.degree_propensity(i));
  }
  BlockModelSpec out = spec;
  for (int i = 0; i < spec.node_count(); ++i) {
    const int g = spec.membership[static_cast<std::size_t>(i)];
    out.degree_propensity(i) /= max_prop(g);
  }
  for (auto& b : out.connectivity) {
    b = symmetrized(max_prop.asDiagonal() * b * max_prop.asDiagonal());
    if (b.minCoeff() < 0.0 || b.maxCoeff() > 1.0) {
      throw std::invalid_argument(
          "with_unit_max_propensity: rescaled connectivity leaves [0, 1]");
    }
  }
  return out;
}

namespace {

BlockModelSpec three_community_spec(int n, double rho,
                                    std::vector<Matrix> connectivity,
                                    std::optional<double> propensity_norm,
                                    std::uint64_t psi_seed) {
  BlockModelSpec spec;
  spec.community_count = 3;
  spec.membership =
      BlockModelSpec::membership_from_proportions(n, {0.4, 0.3, 0.3});
  spec.connectivity = std::move(connectivity);
  spec.sparsity = rho;
  if (propensity_norm) {
    spec.degree_propensity =
        sample_degree_propensity(n, *propensity_norm, psi_seed);
  }
  spec.validate();
  return spec;
}

}  // namespace

BlockModelSpec benchmark_spec(int n, int L, double rho,
                              const Eigen::Vector3d& scales_a,
                              const Eigen::Vector3d& scales_b,
                              std::optional<double> propensity_norm,
                              std::uint64_t psi_seed) {
  if (L < 1) {
    throw std::invalid_argument("benchmark_spec: need L >= 1");
  }
  const Matrix first = benchmark_connectivity(scales_a);
  const Matrix second = benchmark_connectivity(scales_b);
  std::vector<Matrix> connectivity;
  connectivity.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    connectivity.push_back(l < L / 2 ? first : second);
  }
  return three_community_spec(n, rho, std::move(connectivity),
                              propensity_norm, psi_seed);
}

BlockModelSpec paired_difference_spec(int n, int L, double rho, double offset,
                                      std::optional<double> propensity_norm,
                                      std::uint64_t psi_seed) {
  if (L < 4 || L % 2 != 0) {
    throw std::invalid_argument("paired_difference_spec: need even L >= 4");
  }
  const Matrix first = benchmark_connectivity(benchmark_scales_a());
  const Matrix second = benchmark_connectivity(benchmark_scales_b());
  Matrix shifted = first;
  shifted(0, 0) += offset;
  if (shifted(0, 0) < 0.0 || shifted(0, 0) > 1.0) {
    throw std::invalid_argument(
        "paired_difference_spec: offset pushes connectivity outside [0, 1]");
  }
  std::vector<Matrix> connectivity;
  connectivity.reserve(static_cast<std::size_t>(L));
  connectivity.push_back(first);    // layer 1
  connectivity.push_back(shifted);  // layer 2, the probed difference
  for (int l = 2; l < L / 2 + 1; ++l) connectivity.push_back(first);
  for (int l = L / 2 + 1; l < L; ++l) connectivity.push_back(second);
  return three_community_spec(n, rho, std::move(connectivity),
                              propensity_norm, psi_seed);
}

double benchmark_propensity_norm(int n) {
  switch (n) {
    case 300: return 10.4;
    case 400: return 12.0;
    case 500: return 13.4;
    default:
      throw std::invalid_argument(
          "benchmark_propensity_norm: no calibrated norm for n=" +
          std::to_string(n));
  }
}

AssumptionReport check_assumptions(const BlockModelSpec& spec) {
  spec.validate();
  const int K = spec.community_count;
  const int L = spec.layer_count();
  const int n = spec.node_count();

  AssumptionReport rep;

  Matrix agg = Matrix::Zero(K, K);
  for (const auto& b : spec.connectivity) {
    agg += b * b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(agg));
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  rep.min_eigenvalue_rate = lo / L;
  rep.aggregate_rank_deficient = lo <= 1e-12 * std::max(hi, 1.0);

  const Eigen::VectorXi sizes = spec.community_sizes();
  rep.balance_low = static_cast<double>(K) * sizes.minCoeff() / n;
  rep.balance_high = static_cast<double>(K) * sizes.maxCoeff() / n;

  rep.edge_variance = Vector::Zero(L);
  for (int l = 0; l < L; ++l) {
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double q = spec.edge_probability(l, i, j);
        s2 += q * (1.0 - q);
      }
    }
    rep.edge_variance(l) = s2;
  }

  const Vector eff = spec.effective_sizes();
  double psi_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    psi_sq += spec.propensity(i) * spec.propensity(i);
  }
  rep.propensity_balance = Vector(K);
  for (int k = 0; k < K; ++k) {
    rep.propensity_balance(k) = K * std::sqrt(eff(k)) / std::sqrt(psi_sq);
  }
  return rep;
}

}  // namespace scce
