#include "rlg/robust_scale.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rlg {

namespace {

// mean rho(u / s) - b and its derivative in s.
struct MScaleEquation {
  const Eigen::Ref<const Eigen::VectorXd>& u;
  double c;
  double b;

  double value(double s) const {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) acc += rho(u[j] / s, c);
    return acc / static_cast<double>(u.size()) - b;
  }

  void value_and_slope(double s, double& g, double& dg) const {
    double acc = 0.0;
    double slope = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      const double v = u[j] / s;
      acc += rho(v, c);
      slope += psi(v, c) * v;
    }
    const double n = static_cast<double>(u.size());
    g = acc / n - b;
    dg = -slope / (n * s);
  }
};

}  // namespace

MScale m_scale(const Eigen::Ref<const Eigen::VectorXd>& u, double c, double b) {
  const Eigen::Index n = u.size();
  if (n == 0) return {0.0, true};

  std::vector<double> a(static_cast<std::size_t>(n));
  Eigen::Index nonzero = 0;
  double max_abs = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    a[static_cast<std::size_t>(j)] = std::abs(u[j]);
    if (u[j] != 0.0) ++nonzero;
    max_abs = std::max(max_abs, std::abs(u[j]));
  }
  // As s -> 0 the mean tends to the nonzero fraction; a root exists only above b.
  if (static_cast<double>(nonzero) <= b * static_cast<double>(n)) return {0.0, true};

  const auto mid = a.begin() + n / 2;
  std::nth_element(a.begin(), mid, a.end());
  const double median = *mid;

  const MScaleEquation eq{u, c, b};
  double lo = median > 0.0 ? median / c : max_abs / c;
  double hi = max_abs * c;
  while (eq.value(lo) <= 0.0) lo *= 0.5;
  while (eq.value(hi) >= 0.0) hi *= 2.0;

  double s = std::clamp(median / 0.6745, lo, hi);
  if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double g = 0.0;
    double dg = 0.0;
    eq.value_and_slope(s, g, dg);
    if (g == 0.0) break;
    if (g > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    double next = (dg < 0.0) ? s - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double change = std::abs(next - s);
    s = next;
    if (change <= 1e-13 * s || hi - lo <= 1e-14 * s) break;
  }
  return {s, false};
}

double tau_scale(const Eigen::Ref<const Eigen::VectorXd>& u, const RhoParams& params) {
  const MScale s = m_scale(u, params.c1, params.b);
  if (s.scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) acc += rho(u[j] / s.scale, params.c2);
  return s.scale * std::sqrt(acc / static_cast<double>(u.size()));
}

}  // namespace rlg
