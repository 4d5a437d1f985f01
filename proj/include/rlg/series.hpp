#pragma once

// Cancellation-free evaluation of the exponential remainders that appear in
// the loggamma log-density and its derivatives. Each function is analytic at
// t = 0; a Taylor series is used for |t| < 1 and the closed form elsewhere.

#include <array>
#include <cmath>
#include <cstddef>

namespace rlg::series {

namespace detail {

inline constexpr std::size_t kTerms = 26;

// coefficient j = numer(j) / (j + shift)!
template <typename Numer>
constexpr std::array<double, kTerms> make_coefficients(std::size_t shift, Numer numer) {
  std::array<double, kTerms> c{};
  for (std::size_t j = 0; j < kTerms; ++j) {
    double fact = 1.0;
    for (std::size_t i = 2; i <= j + shift; ++i) fact *= static_cast<double>(i);
    c[j] = numer(static_cast<double>(j)) / fact;
  }
  return c;
}

inline constexpr auto kRem1 = make_coefficients(1, [](double) { return 1.0; });
inline constexpr auto kRem2 = make_coefficients(2, [](double) { return 1.0; });
inline constexpr auto kM = make_coefficients(2, [](double j) { return j + 1.0; });
inline constexpr auto kK = make_coefficients(3, [](double j) { return j + 1.0; });
inline constexpr auto kQ = make_coefficients(4, [](double j) { return (j + 1.0) * (j + 2.0); });

template <typename Scalar>
Scalar horner(const std::array<double, kTerms>& c, Scalar t) {
  Scalar acc(0);
  for (std::size_t i = kTerms; i-- > 0;) acc = acc * t + Scalar(c[i]);
  return acc;
}

}  // namespace detail

/// expm1(t) / t
template <typename Scalar>
Scalar exp_rem1(Scalar t) {
  using std::abs;
  if (abs(t) < Scalar(1)) return detail::horner(detail::kRem1, t);
  return std::expm1(t) / t;
}

/// (exp(t) - 1 - t) / t^2
template <typename Scalar>
Scalar exp_rem2(Scalar t) {
  using std::abs;
  if (abs(t) < Scalar(1)) return detail::horner(detail::kRem2, t);
  return (std::expm1(t) - t) / (t * t);
}

/// (t e^t - e^t + 1) / t^2
template <typename Scalar>
Scalar exp_m(Scalar t) {
  using std::abs;
  if (abs(t) < Scalar(1)) return detail::horner(detail::kM, t);
  return (t * std::exp(t) - std::expm1(t)) / (t * t);
}

/// [t (e^t - 1) - 2 (e^t - 1 - t)] / t^3
template <typename Scalar>
Scalar exp_k(Scalar t) {
  using std::abs;
  if (abs(t) < Scalar(1)) return detail::horner(detail::kK, t);
  const Scalar e = std::expm1(t);
  return (t * e - Scalar(2) * (e - t)) / (t * t * t);
}

/// [e^t (t^2 - 4t + 6) - 2t - 6] / t^4
template <typename Scalar>
Scalar exp_q(Scalar t) {
  using std::abs;
  if (abs(t) < Scalar(1)) return detail::horner(detail::kQ, t);
  const Scalar t2 = t * t;
  return (std::exp(t) * (t2 - Scalar(4) * t + Scalar(6)) - Scalar(2) * t - Scalar(6)) / (t2 * t2);
}

/// [(1 + x) log1p(x) - x] / x^2, x > -1
template <typename Scalar>
Scalar log_rem(Scalar x) {
  using std::abs;
  if (abs(x) < Scalar(0.1)) {
    // sum_{m >= 2} (-1)^m x^(m-2) / (m (m - 1))
    Scalar acc(0);
    for (int m = 22; m >= 2; --m) {
      const Scalar c = Scalar((m % 2 == 0) ? 1.0 : -1.0) / Scalar(m * (m - 1));
      acc = acc * x + c;
    }
    return acc;
  }
  return ((Scalar(1) + x) * std::log1p(x) - x) / (x * x);
}

}  // namespace rlg::series
