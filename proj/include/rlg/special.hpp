#pragma once

// Special functions used by the loggamma family: Stirling remainder, digamma,
// trigamma, the normal distribution and the regularized incomplete gamma
// function. All routines target ~1e-12 relative accuracy on the domains used
// by the library.

#include <array>

namespace rlg::special {

/// B_{2k} / (2k (2k - 1)), k = 1..8: coefficients of the Stirling series.
inline constexpr std::array<double, 8> kStirlingSeries = {
    1.0 / 12.0,   -1.0 / 360.0,      1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0, -691.0 / 360360.0, 1.0 / 156.0,  -3617.0 / 122400.0};

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// log Gamma(a) - [(a - 1/2) log a - a + log sqrt(2 pi)], a > 0.
double stirling_remainder(double a);

/// First and second derivative of stirling_remainder with respect to a.
double stirling_remainder_d1(double a);
double stirling_remainder_d2(double a);

double digamma(double x);
double trigamma(double x);

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_ccdf(double x);
double normal_quantile(double p);

struct GammaTail {
  double lower;  ///< P(a, x)
  double upper;  ///< Q(a, x) = 1 - P(a, x)
};

/// Regularized incomplete gamma functions at x = a * exp(t).
///
/// Taking the argument on a log scale relative to the shape keeps the
/// Gamma(a) prefactor accurate for very large shapes; this is exactly the
/// form the loggamma CDF needs (x = a exp(lambda u), a = lambda^-2).
/// Series for x < a + 1, Lentz continued fraction otherwise, and Temme's
/// uniform expansion (two terms) once a >= 1e4.
GammaTail regularized_gamma_log(double a, double t);

/// Regularized incomplete gamma functions at an ordinary argument x >= 0.
GammaTail regularized_gamma(double a, double x);

/// P(X > x) for X ~ chi-squared with df degrees of freedom.
double chisq_upper_tail(double x, double df);

}  // namespace rlg::special
