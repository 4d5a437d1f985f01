#include "rlg/special.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "rlg/errors.hpp"
#include "rlg/series.hpp"

namespace rlg::special {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrt2Pi = 2.50662827463100050242;

constexpr double kStirlingSeriesMin = 10.0;

// Taylor coefficients (in t = log(x / a)) of Temme's C0 and C1.
constexpr std::array<double, 16> kTemmeC0 = {
    -1.0 / 3.0,
    1.0 / 12.0,
    -1.0 / 1080.0,
    -19.0 / 12960.0,
    1.0 / 181440.0,
    47.0 / 1360800.0,
    1.0 / 32659200.0,
    -221.0 / 261273600.0,
    -281.0 / 155196518400.0,
    857.0 / 40739086080.0,
    1553.0 / 40351094784000.0,
    -41851.0 / 79234877030400.0,
    -9571.0 / 16639324176384000.0,
    610387.0 / 45758141485056000.0,
    13003313.0 / 2178087534688665600000.0,
    -11775119413.0 / 34849400555018649600000.0};

constexpr std::array<double, 14> kTemmeC1 = {
    -1.0 / 540.0,
    -1.0 / 288.0,
    25.0 / 12096.0,
    -223.0 / 1088640.0,
    -89.0 / 1088640.0,
    757.0 / 52254720.0,
    445331.0 / 155196518400.0,
    -1482119.0 / 2172751257600.0,
    -7921307.0 / 84737299046400.0,
    834173617.0 / 30505427656704000.0,
    58967339.0 / 20336951771136000.0,
    -82223.0 / 82169502105600.0,
    -1931929541.0 / 22225383007027200000.0,
    171736100587.0 / 4978485793574092800000.0};

constexpr double kTemmeMinShape = 1e4;

template <std::size_t N>
double horner(const std::array<double, N>& c, double t) {
  double acc = 0.0;
  for (std::size_t i = N; i-- > 0;) acc = acc * t + c[i];
  return acc;
}

GammaTail temme(double a, double t) {
  const double g = series::exp_rem2(t);
  const double eta = t * std::sqrt(2.0 * g);
  double c0 = 0.0;
  double c1 = 0.0;
  if (std::abs(t) < 0.5) {
    c0 = horner(kTemmeC0, t);
    c1 = horner(kTemmeC1, t);
  } else {
    const double e = std::expm1(t);
    c0 = 1.0 / e - 1.0 / eta;
    c1 = 1.0 / (eta * eta * eta) - 1.0 / (e * e * e) - 1.0 / (e * e) - 1.0 / (12.0 * e);
  }
  const double z = eta * std::sqrt(0.5 * a);
  const double r = std::exp(-a * t * t * g) / (kSqrt2Pi * std::sqrt(a)) * (c0 + c1 / a);
  return {0.5 * std::erfc(-z) - r, 0.5 * std::erfc(z) + r};
}

}  // namespace

double stirling_remainder(double a) {
  if (a >= kStirlingSeriesMin) {
    const double inv = 1.0 / a;
    const double inv2 = inv * inv;
    double acc = 0.0;
    for (std::size_t k = kStirlingSeries.size(); k-- > 0;) acc = acc * inv2 + kStirlingSeries[k];
    return acc * inv;
  }
  return std::lgamma(a) - (a - 0.5) * std::log(a) + a - kLogSqrt2Pi;
}

double stirling_remainder_d1(double a) {
  if (a >= kStirlingSeriesMin) {
    const double inv2 = 1.0 / (a * a);
    double acc = 0.0;
    for (std::size_t k = kStirlingSeries.size(); k-- > 0;) {
      acc = acc * inv2 - static_cast<double>(2 * k + 1) * kStirlingSeries[k];
    }
    return acc * inv2;
  }
  return digamma(a) - std::log(a) + 0.5 / a;
}

double stirling_remainder_d2(double a) {
  if (a >= kStirlingSeriesMin) {
    const double inv = 1.0 / a;
    const double inv2 = inv * inv;
    double acc = 0.0;
    for (std::size_t k = kStirlingSeries.size(); k-- > 0;) {
      acc = acc * inv2 + static_cast<double>((2 * k + 1) * (2 * k + 2)) * kStirlingSeries[k];
    }
    return acc * inv2 * inv;
  }
  return trigamma(a) - 1.0 / a - 0.5 / (a * a);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return acc + std::log(x) - 0.5 / x - tail;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv * inv2 *
      (1.0 / 6.0 -
       inv2 * (1.0 / 30.0 -
               inv2 * (1.0 / 42.0 -
                       inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
  return acc + inv + 0.5 * inv2 + tail;
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_ccdf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Work on the smaller tail to keep the residual accurate.
  const double e = (x < 0.0) ? normal_cdf(x) - p : (1.0 - p) - normal_ccdf(x);
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

GammaTail regularized_gamma_log(double a, double t) {
  if (!(a > 0.0)) throw DomainError("regularized_gamma: shape must be positive");
  if (std::isnan(t)) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  if (t == -std::numeric_limits<double>::infinity()) return {0.0, 1.0};
  if (t == std::numeric_limits<double>::infinity()) return {1.0, 0.0};
  if (a >= kTemmeMinShape) return temme(a, t);

  const double x = a * std::exp(t);
  // log(x^a e^-x / Gamma(a)) without cancelling large terms.
  const double log_pre = 0.5 * std::log(a) - kLogSqrt2Pi - stirling_remainder(a) - a * t * t * series::exp_rem2(t);
  const double pre = std::exp(log_pre);
  if (x < a + 1.0) {
    if (pre == 0.0) return {0.0, 1.0};
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 100000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    const double lower = sum * pre;
    return {lower, 1.0 - lower};
  }
  if (pre == 0.0) return {1.0, 0.0};
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const double upper = pre * h;
  return {1.0 - upper, upper};
}

GammaTail regularized_gamma(double a, double x) {
  if (!(x >= 0.0)) throw DomainError("regularized_gamma: argument must be nonnegative");
  if (x == 0.0) return {0.0, 1.0};
  return regularized_gamma_log(a, std::log(x / a));
}

double chisq_upper_tail(double x, double df) {
  if (!(df > 0.0)) throw DomainError("chisq_upper_tail: df must be positive");
  if (!(x > 0.0)) return 1.0;
  if (df == 1.0) return std::erfc(std::sqrt(0.5 * x));
  return regularized_gamma(0.5 * df, 0.5 * x).upper;
}

}  // namespace rlg::special
