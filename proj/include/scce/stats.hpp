#pragma once

#include "scce/model.hpp"

#include <functional>
#include <vector>

namespace scce {

/// Standard normal quantile, p in (0, 1).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Chi-squared CDF with dof degrees of freedom.
double chi_squared_cdf(double x, int dof);

/// One-sample Kolmogorov-Smirnov test against a fully specified continuous
/// CDF. The p-value uses the asymptotic Kolmogorov distribution with the
/// usual small-sample size adjustment.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf);

/// Symmetric square root V sqrt(diag(max(lambda, 0))) V^T.
Matrix symmetric_sqrt(const Matrix& m);

/// Symmetric inverse square root; eigenvalues below rel_floor * lambda_max
/// are treated as zero (pseudo-inverse convention).
Matrix symmetric_inverse_sqrt(const Matrix& m, double rel_floor = 1e-12);

/// Draws from N(0, sigma) given a precomputed square root of sigma, using
/// one uniform pair per normal via Box-Muller on counter-based bits.
Vector gaussian_from_sqrt(const Matrix& sqrt_sigma, std::uint64_t draw_key);

}  // namespace scce
