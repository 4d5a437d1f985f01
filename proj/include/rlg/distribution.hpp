#pragma once

// The generalized loggamma family LG(mu, sigma, lambda).
//
// With u = (y - mu) / sigma and alpha = lambda^-2 the standardized density is
//
//   f(u) = |lambda| / Gamma(alpha) alpha^alpha exp(alpha (lambda u - e^{lambda u}))
//
// for lambda != 0 and the standard normal density for lambda = 0. Internally the
// log-density is written as
//
//   log f(u) = -log sqrt(2 pi) - S(alpha) - u^2 g(lambda u),
//
// with S the Stirling remainder and g(t) = (e^t - 1 - t) / t^2. Both terms are
// smooth through lambda = 0, so one code path serves every shape.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>

#include "rlg/theta.hpp"

namespace rlg {

/// alpha, gamma, delta and eta = E(exp(y)) of the generalized gamma back-transform.
struct GammaDerived {
  double alpha;
  double gamma;
  double delta;
  /// NaN when alpha + 1/gamma <= 0 (the moment diverges).
  double eta;
};

double standard_log_density(double u, double lambda);
double standard_cdf(double u, double lambda);
/// Q*(p, lambda): the p-quantile of LG(0, 1, lambda).
double standard_quantile(double p, double lambda);

double density(double y, const Theta& theta);
/// -inf where the density vanishes in exact arithmetic.
double log_density(double y, const Theta& theta);
double cdf(double y, const Theta& theta);
double quantile(double p, const Theta& theta);

/// n i.i.d. draws; identical for identical seeds.
Eigen::VectorXd sample(std::size_t n, const Theta& theta, std::uint64_t seed);

/// Requires lambda != 0.
GammaDerived gamma_derived(const Theta& theta);

/// E(exp(y)). Throws DomainError("moment undefined") when 1 + sigma lambda <= 0.
double mean_exp(const Theta& theta);

/// Gradient of log_density with respect to (mu, sigma, lambda).
Eigen::Vector3d score(double y, const Theta& theta);

/// Hessian of log_density (the Jacobian of score); symmetric.
Eigen::Matrix3d score_jacobian(double y, const Theta& theta);

struct LogDensityDerivatives {
  double value;
  Eigen::Vector3d gradient;
  Eigen::Matrix3d hessian;
};

/// log_density, score and score_jacobian from one evaluation.
LogDensityDerivatives log_density_derivatives(double y, const Theta& theta);

}  // namespace rlg
