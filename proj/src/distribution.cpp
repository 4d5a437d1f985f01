#include "rlg/distribution.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rlg/errors.hpp"
#include "rlg/series.hpp"
#include "rlg/special.hpp"

namespace rlg {

Theta::Theta(double mu, double sigma, double lambda) : mu_(mu), sigma_(sigma), lambda_(lambda) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(lambda)) {
    throw DomainError("Theta: parameters must be finite");
  }
  if (!(sigma > 0.0)) throw DomainError("Theta: sigma must be positive, got " + std::to_string(sigma));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this |lambda| the family is numerically the normal one.
constexpr double kNormalLambda = 1e-100;

struct ShapeTerm {
  double value;  // S(lambda^-2)
  double d1;     // d/dlambda
  double d2;     // d^2/dlambda^2
};

// S(alpha) with alpha = lambda^-2 and its lambda-derivatives. For small
// |lambda| the Stirling series becomes a power series in lambda:
// S = sum_k c_k lambda^(4k+2).
ShapeTerm shape_term(double lambda) {
  if (std::abs(lambda) <= 0.3) {
    const double l2 = lambda * lambda;
    const double l4 = l2 * l2;
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t k = special::kStirlingSeries.size(); k-- > 0;) {
      const double p = static_cast<double>(4 * k + 2);
      v = v * l4 + special::kStirlingSeries[k];
      d1 = d1 * l4 + p * special::kStirlingSeries[k];
      d2 = d2 * l4 + p * (p - 1.0) * special::kStirlingSeries[k];
    }
    return {v * l2, d1 * lambda, d2};
  }
  const double alpha = 1.0 / (lambda * lambda);
  const double s1 = special::stirling_remainder_d1(alpha);
  const double s2 = special::stirling_remainder_d2(alpha);
  const double l3 = lambda * lambda * lambda;
  const double l4 = lambda * l3;
  return {special::stirling_remainder(alpha), -2.0 * s1 / l3, 4.0 * s2 / (l3 * l3) + 6.0 * s1 / l4};
}

void require_finite(double y, const char* what) {
  if (!std::isfinite(y)) throw DomainError(std::string(what) + ": argument must be finite");
}

}  // namespace

double standard_log_density(double u, double lambda) {
  if (std::isnan(u)) return u;
  if (std::isinf(u)) return -kInf;
  const double h = u * u * series::exp_rem2(lambda * u);
  if (!std::isfinite(h)) return -kInf;
  return -special::kLogSqrt2Pi - shape_term(lambda).value - h;
}

double standard_cdf(double u, double lambda) {
  if (std::isnan(u)) return u;
  if (std::abs(lambda) < kNormalLambda) return special::normal_cdf(u);
  const double alpha = 1.0 / (lambda * lambda);
  const auto tail = special::regularized_gamma_log(alpha, lambda * u);
  return lambda > 0.0 ? tail.lower : tail.upper;
}

double standard_quantile(double p, double lambda) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  const double z = special::normal_quantile(p);
  if (std::abs(lambda) < kNormalLambda) return z;

  // Wilson-Hilferty start for the underlying Gamma(alpha) variate.
  const double alpha = 1.0 / (lambda * lambda);
  double u = z;
  {
    const double zg = lambda > 0.0 ? z : -z;
    const double c = 1.0 - 1.0 / (9.0 * alpha) + zg * std::sqrt(1.0 / (9.0 * alpha));
    if (c > 0.0) {
      const double start = 3.0 * std::log(c) / lambda;
      if (std::isfinite(start)) u = start;
    }
  }

  auto residual = [&](double v) { return standard_cdf(v, lambda) - p; };

  // Bracket the root by geometric expansion.
  double r = residual(u);
  if (r == 0.0) return u;
  double lo = u;
  double hi = u;
  double r_lo = r;
  double r_hi = r;
  double step = 1.0;
  if (r < 0.0) {
    while (r_hi < 0.0) {
      lo = hi;
      r_lo = r_hi;
      hi += step;
      step *= 2.0;
      r_hi = residual(hi);
      if (!std::isfinite(hi)) throw EstimationError("quantile: failed to bracket");
    }
  } else {
    while (r_lo > 0.0) {
      hi = lo;
      r_hi = r_lo;
      lo -= step;
      step *= 2.0;
      r_lo = residual(lo);
      if (!std::isfinite(lo)) throw EstimationError("quantile: failed to bracket");
    }
  }
  if (r_lo == 0.0) return lo;
  if (r_hi == 0.0) return hi;

  // Safeguarded Newton inside [lo, hi].
  u = (r < 0.0) ? lo : hi;
  r = (r < 0.0) ? r_lo : r_hi;
  for (int it = 0; it < 200; ++it) {
    const double f = std::exp(standard_log_density(u, lambda));
    double next = (f > 0.0) ? u - r / f : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double delta = std::abs(next - u);
    u = next;
    r = residual(u);
    if (r == 0.0) break;
    if (r < 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    if (delta <= 1e-14 * std::max(1.0, std::abs(u)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(u))) break;
  }
  return u;
}

double log_density(double y, const Theta& theta) {
  return standard_log_density((y - theta.mu()) / theta.sigma(), theta.lambda()) - std::log(theta.sigma());
}

double density(double y, const Theta& theta) { return std::exp(log_density(y, theta)); }

double cdf(double y, const Theta& theta) {
  return standard_cdf((y - theta.mu()) / theta.sigma(), theta.lambda());
}

double quantile(double p, const Theta& theta) {
  return theta.mu() + theta.sigma() * standard_quantile(p, theta.lambda());
}

Eigen::VectorXd sample(std::size_t n, const Theta& theta, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  const double lambda = theta.lambda();
  // The gamma transform loses precision like eps / |lambda|; the normal branch
  // is within O(lambda) in distribution there.
  if (std::abs(lambda) < 1e-8) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : out) v = theta.mu() + theta.sigma() * normal(engine);
    return out;
  }
  const double alpha = 1.0 / (lambda * lambda);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  for (auto& v : out) {
    double g = 0.0;
    do {
      g = gamma(engine);
    } while (g <= 0.0);
    v = theta.mu() + theta.sigma() * std::log(g / alpha) / lambda;
  }
  return out;
}

GammaDerived gamma_derived(const Theta& theta) {
  const double lambda = theta.lambda();
  if (lambda == 0.0) throw DomainError("gamma_derived: lambda must be nonzero");
  const double alpha = 1.0 / (lambda * lambda);
  const double gamma = lambda / theta.sigma();
  const double delta = std::exp(theta.mu() + 2.0 * std::log(std::abs(lambda)) * theta.sigma() / lambda);
  double eta = std::numeric_limits<double>::quiet_NaN();
  if (1.0 + theta.sigma() * lambda > 0.0) eta = mean_exp(theta);
  return {alpha, gamma, delta, eta};
}

double mean_exp(const Theta& theta) {
  const double mu = theta.mu();
  const double sigma = theta.sigma();
  const double lambda = theta.lambda();
  if (std::abs(lambda) < kNormalLambda) return std::exp(mu + 0.5 * sigma * sigma);
  const double x = sigma * lambda;
  if (!(1.0 + x > 0.0)) {
    throw DomainError("mean_exp: moment undefined (alpha + 1/gamma <= 0, i.e. 1 + sigma*lambda <= 0)");
  }
  // log eta = log delta + lgamma(alpha + 1/gamma) - lgamma(alpha), rearranged
  // so that the O(1/lambda) terms cancel analytically.
  const double alpha = 1.0 / (lambda * lambda);
  const double log_eta = mu + sigma * sigma * series::log_rem(x) - 0.5 * std::log1p(x) +
                         special::stirling_remainder(alpha * (1.0 + x)) - special::stirling_remainder(alpha);
  return std::exp(log_eta);
}

LogDensityDerivatives log_density_derivatives(double y, const Theta& theta) {
  require_finite(y, "score");
  const double sigma = theta.sigma();
  const double lambda = theta.lambda();
  const double u = (y - theta.mu()) / sigma;
  const double t = lambda * u;
  const double u2 = u * u;

  const double h = u2 * series::exp_rem2(t);
  const double h_u = u * series::exp_rem1(t);
  const double h_uu = std::exp(t);
  const double h_ul = u2 * series::exp_m(t);
  const double h_l = u2 * u * series::exp_k(t);
  const double h_ll = u2 * u2 * series::exp_q(t);
  const ShapeTerm s = shape_term(lambda);

  const double s2 = sigma * sigma;
  LogDensityDerivatives out;
  out.value = -std::log(sigma) - special::kLogSqrt2Pi - s.value - h;
  out.gradient << h_u / sigma, (u * h_u - 1.0) / sigma, -s.d1 - h_l;

  const double mm = -h_uu / s2;
  const double ms = -(u * h_uu + h_u) / s2;
  const double ml = h_ul / sigma;
  const double ss = (1.0 - 2.0 * u * h_u - u2 * h_uu) / s2;
  const double sl = u * h_ul / sigma;
  const double ll = -s.d2 - h_ll;
  out.hessian << mm, ms, ml, ms, ss, sl, ml, sl, ll;
  return out;
}

Eigen::Vector3d score(double y, const Theta& theta) { return log_density_derivatives(y, theta).gradient; }

Eigen::Matrix3d score_jacobian(double y, const Theta& theta) {
  return log_density_derivatives(y, theta).hessian;
}

}  // namespace rlg
