#pragma once

// Tukey biweight rho/psi, the M-scale and the tau scale.

#include <Eigen/Core>
#include <cmath>

namespace rlg {

/// Tuning of the tau scale: rho_1 = rho(., c1) for the M-scale, rho_2 = rho(., c2)
/// for the efficiency part, and the M-scale target b. Requires c1 <= c2 so that
/// rho_2 <= rho_1.
struct RhoParams {
  double c1 = 1.548;
  double c2 = 6.08;
  double b = 0.5;
};

/// Tukey biweight, normalized so that sup rho = 1.
template <typename Scalar>
Scalar rho(Scalar u, Scalar c) {
  using std::abs;
  if (abs(u) >= c) return Scalar(1);
  const Scalar x2 = (u / c) * (u / c);
  return x2 * (Scalar(3) - x2 * (Scalar(3) - x2));
}

/// d rho / du
template <typename Scalar>
Scalar psi(Scalar u, Scalar c) {
  using std::abs;
  if (abs(u) >= c) return Scalar(0);
  const Scalar x = u / c;
  const Scalar w = Scalar(1) - x * x;
  return Scalar(6) * x * w * w / c;
}

/// psi(u) / u, continuous at 0.
template <typename Scalar>
Scalar psi_over_u(Scalar u, Scalar c) {
  using std::abs;
  if (abs(u) >= c) return Scalar(0);
  const Scalar x = u / c;
  const Scalar w = Scalar(1) - x * x;
  return Scalar(6) * w * w / (c * c);
}

struct MScale {
  double scale = 0.0;
  /// True when no positive root exists: all u are zero, or at most a fraction
  /// b of them is nonzero. The scale is then 0.
  bool degenerate = false;
};

/// Solves (1/n) sum rho(u_j / s, c) = b for s > 0.
MScale m_scale(const Eigen::Ref<const Eigen::VectorXd>& u, double c, double b);

/// tau^2 = s1^2 (1/n) sum rho(u_j / s1, c2), s1 the M-scale with (c1, b).
double tau_scale(const Eigen::Ref<const Eigen::VectorXd>& u, const RhoParams& params);

namespace detail {

/// tau scale with an arbitrary second rho function. Test hook only: with
/// rho2(v) = v^2 the result is the root mean square of u.
template <typename Rho2>
double tau_scale_with(const Eigen::Ref<const Eigen::VectorXd>& u, double c1, double b, Rho2&& rho2) {
  const MScale s = m_scale(u, c1, b);
  if (s.scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) acc += rho2(u[j] / s.scale);
  return s.scale * std::sqrt(acc / static_cast<double>(u.size()));
}

}  // namespace detail

}  // namespace rlg
