#include "scce/stats.hpp"

#include "scce/rng.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scce {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
  }
  static const boost::math::normal_distribution<double> dist;
  return boost::math::quantile(dist, p);
}

double normal_cdf(double x) {
  static const boost::math::normal_distribution<double> dist;
  return boost::math::cdf(dist, x);
}

double chi_squared_cdf(double x, int dof) {
  if (dof < 1) {
    throw std::invalid_argument("chi_squared_cdf: dof must be >= 1");
  }
  if (x <= 0.0) return 0.0;
  const boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(dist, x);
}

namespace {

// Kolmogorov survival function Q(lambda) = 2 sum_j (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf) {
  if (samples.empty()) {
    throw std::invalid_argument("ks_test: no samples");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  KsResult out;
  out.statistic = d;
  const double root_n = std::sqrt(n);
  out.p_value = kolmogorov_survival((root_n + 0.12 + 0.11 / root_n) * d);
  return out;
}

Matrix symmetric_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("symmetric_sqrt: eigendecomposition failed");
  }
  const Vector values = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrized(es.eigenvectors() * values.asDiagonal() *
                     es.eigenvectors().transpose());
}

Matrix symmetric_inverse_sqrt(const Matrix& m, double rel_floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error(
        "symmetric_inverse_sqrt: eigendecomposition failed");
  }
  const Vector values = es.eigenvalues();
  const double top = values.cwiseAbs().maxCoeff();
  Vector inv(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    inv(i) = values(i) > rel_floor * top ? 1.0 / std::sqrt(values(i)) : 0.0;
  }
  return symmetrized(es.eigenvectors() * inv.asDiagonal() *
                     es.eigenvectors().transpose());
}

Vector gaussian_from_sqrt(const Matrix& sqrt_sigma, std::uint64_t draw_key) {
  const Eigen::Index d = sqrt_sigma.rows();
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    // Box-Muller; u1 nudged away from 0 so the log is finite.
    const double u1 =
        uniform01(keyed(draw_key, static_cast<std::uint64_t>(i), 0)) +
        0x1.0p-54;
    const double u2 =
        uniform01(keyed(draw_key, static_cast<std::uint64_t>(i), 1));
    z(i) = std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
  return sqrt_sigma * z;
}

}  // namespace scce
