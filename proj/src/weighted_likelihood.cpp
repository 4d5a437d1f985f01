#include "rlg/weighted_likelihood.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlg/distribution.hpp"
#include "rlg/errors.hpp"
#include "rlg/special.hpp"

namespace rlg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kGridPoints = 512;

void require_sample(const Eigen::VectorXd& y, Eigen::Index min_n) {
  if (y.size() < min_n) throw DomainError("at least " + std::to_string(min_n) + " observations are required");
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (!std::isfinite(y[j])) throw DomainError("observations must be finite");
  }
}

Eigen::VectorXd sorted_copy(const Eigen::VectorXd& y) {
  Eigen::VectorXd s = y;
  std::sort(s.begin(), s.end());
  return s;
}

double eta_or_nan(const Theta& theta) {
  if (!(1.0 + theta.sigma() * theta.lambda() > 0.0)) return kNaN;
  return mean_exp(theta);
}

// Weight of a point given the data density estimate and the smoothed model.
class WeightFunction {
 public:
  WeightFunction(const Eigen::VectorXd& data, const Theta& theta, const Control& control)
      : kde_(data, control.bw * theta.sigma()),
        model_(theta, control.bw * theta.sigma(), control.subdivisions),
        raf_(control.raf),
        minw_(control.minw) {}

  double delta(double x) const {
    const double f = kde_(x);
    const double log_m = model_.log_value(x);
    if (f == 0.0) return std::isfinite(log_m) ? -1.0 : 0.0;
    if (!std::isfinite(log_m)) return kInf;
    return std::exp(std::log(f) - log_m) - 1.0;
  }

  double operator()(double x) const {
    const double w = raf_weight(raf_, delta(x));
    return w < minw_ ? 0.0 : w;
  }

 private:
  KernelDensity kde_;
  SmoothedModel model_;
  RafKind raf_;
  double minw_;
};

// Weighted log-likelihood with gradient and Hessian in the optimizer's
// coordinates: (mu, log sigma, lambda), or (mu, log s) with sigma = lambda = s.
struct Evaluation {
  double value = -kInf;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

Theta theta_of(const Eigen::VectorXd& phi, ParameterSpace space) {
  const double s = std::exp(phi[1]);
  return space == ParameterSpace::Full ? Theta(phi[0], s, phi[2]) : Theta(phi[0], s, s);
}

Eigen::VectorXd phi_of(const Theta& theta, ParameterSpace space) {
  if (space == ParameterSpace::Full) return Eigen::Vector3d(theta.mu(), std::log(theta.sigma()), theta.lambda());
  return Eigen::Vector2d(theta.mu(), std::log(theta.sigma()));
}

Evaluation evaluate(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Eigen::VectorXd& phi,
                    ParameterSpace space) {
  Evaluation ev;
  const double s = std::exp(phi[1]);
  if (!std::isfinite(phi[0]) || !(s > 0.0) || !std::isfinite(s)) return ev;
  if (space == ParameterSpace::Full && !std::isfinite(phi[2])) return ev;
  const Theta theta = theta_of(phi, space);

  double value = 0.0;
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (w[j] == 0.0) continue;
    const LogDensityDerivatives d = log_density_derivatives(y[j], theta);
    if (!std::isfinite(d.value)) return ev;
    value += w[j] * d.value;
    g += w[j] * d.gradient;
    h += w[j] * d.hessian;
  }
  if (!std::isfinite(value) || !g.allFinite() || !h.allFinite()) return ev;

  ev.value = value;
  if (space == ParameterSpace::Full) {
    const Eigen::Vector3d jac(1.0, s, 1.0);
    ev.grad = g.cwiseProduct(jac);
    ev.hess = jac.asDiagonal() * h * jac.asDiagonal();
    ev.hess(1, 1) += s * g[1];
  } else {
    ev.grad = Eigen::Vector2d(g[0], s * (g[1] + g[2]));
    ev.hess.resize(2, 2);
    ev.hess(0, 0) = h(0, 0);
    ev.hess(0, 1) = ev.hess(1, 0) = s * (h(0, 1) + h(0, 2));
    ev.hess(1, 1) = s * s * (h(1, 1) + 2.0 * h(1, 2) + h(2, 2)) + s * (g[1] + g[2]);
  }
  return ev;
}

// One-step information (1/K) sum_k w(y_k) grad z(y_k) over model quantiles.
Eigen::Matrix3d information_with(const WeightFunction& wf, const Theta& theta, int nexp) {
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  for (int k = 0; k < nexp; ++k) {
    const double yk = quantile((k + 0.5) / nexp, theta);
    const double wk = wf(yk);
    if (wk == 0.0) continue;
    j += wk * score_jacobian(yk, theta);
  }
  return j / static_cast<double>(nexp);
}

FitResult make_result(Method method, const Theta& theta, const Eigen::VectorXd& data, const Eigen::VectorXd& weights,
                      int iterations, bool converged) {
  FitResult fit;
  fit.method = method;
  fit.theta = theta;
  fit.eta = eta_or_nan(theta);
  fit.data = data;
  fit.weights = weights;
  fit.iterations = iterations;
  fit.converged = converged;
  fit.tau = kNaN;
  return fit;
}

}  // namespace

double raf(const RafKind& kind, double delta) {
  if (std::isnan(delta) || delta < -1.0) throw DomainError("raf: delta must be >= -1");
  switch (kind.family) {
    case RafKind::Family::NED:
      return 2.0 - (2.0 + delta) * std::exp(-delta);
    case RafKind::Family::GKL: {
      if (kind.tau == 0.0) return delta;
      if (!(kind.tau * delta + 1.0 > 0.0)) throw DomainError("raf: GKL requires tau * delta + 1 > 0");
      return std::log1p(kind.tau * delta) / kind.tau;
    }
    case RafKind::Family::PWD:
    case RafKind::Family::HD: {
      const double tau = kind.family == RafKind::Family::HD ? 2.0 : kind.tau;
      if (tau == 1.0) return delta;
      if (std::isinf(tau)) return std::log1p(delta);
      return tau * std::expm1(std::log1p(delta) / tau);
    }
    case RafKind::Family::SCHI2: {
      const double d2 = delta + 2.0;
      return (delta / d2) * ((3.0 * delta + 4.0) / d2);
    }
  }
  return kNaN;
}

double raf_weight(const RafKind& kind, double delta) {
  if (std::isnan(delta)) throw DomainError("raf_weight: delta is NaN");
  delta = std::clamp(delta, -1.0 + 1e-12, 1e300);
  const double a = raf(kind, delta);
  const double w = std::max(0.0, a + 1.0) / (delta + 1.0);
  return std::min(1.0, w);
}

KernelDensity::KernelDensity(const Eigen::VectorXd& y, double bandwidth) : h_(bandwidth) {
  if (y.size() < 1) throw DomainError("kde: empty sample");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw DomainError("kde: bandwidth must be positive");
  const Eigen::VectorXd s = sorted_copy(y);
  const double lo = s[0] - 3.0 * h_;
  const double hi = s[s.size() - 1] + 3.0 * h_;
  grid_ = Eigen::VectorXd::LinSpaced(kGridPoints, lo, hi);
  values_.resize(kGridPoints);

  // Kernels beyond 9 bandwidths contribute below 1e-17 relative.
  const double reach = 9.0 * h_;
  const double norm = special::kInvSqrt2Pi / (static_cast<double>(s.size()) * h_);
  for (int i = 0; i < kGridPoints; ++i) {
    const double g = grid_[i];
    const auto first = std::lower_bound(s.begin(), s.end(), g - reach);
    const auto last = std::upper_bound(first, s.end(), g + reach);
    double acc = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (g - *it) / h_;
      acc += std::exp(-0.5 * z * z);
    }
    values_[i] = acc * norm;
  }
}

double KernelDensity::operator()(double x) const {
  const double lo = grid_[0];
  const double hi = grid_[kGridPoints - 1];
  if (!(x >= lo && x <= hi)) return 0.0;
  const double pos = (x - lo) / (hi - lo) * (kGridPoints - 1);
  const int i = std::min(static_cast<int>(pos), kGridPoints - 2);
  const double frac = pos - i;
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double KernelDensity::integral() const {
  const double dx = grid_[1] - grid_[0];
  return dx * (values_.sum() - 0.5 * (values_[0] + values_[kGridPoints - 1]));
}

SmoothedModel::SmoothedModel(const Theta& theta, double bandwidth, int k) : h_(bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw DomainError("smoothed model: bandwidth must be positive");
  if (k < 1) throw DomainError("smoothed model: at least one subdivision is required");
  centers_.resize(k);
  for (int i = 0; i < k; ++i) centers_[i] = quantile((i + 0.5) / k, theta);
}

double SmoothedModel::log_value(double y) const {
  if (std::isnan(y)) return y;
  double top = -kInf;
  for (double c : centers_) {
    const double z = (y - c) / h_;
    top = std::max(top, -0.5 * z * z);
  }
  if (!std::isfinite(top)) return -kInf;
  double acc = 0.0;
  for (double c : centers_) {
    const double z = (y - c) / h_;
    acc += std::exp(-0.5 * z * z - top);
  }
  return top + std::log(acc / static_cast<double>(centers_.size())) - std::log(h_) - special::kLogSqrt2Pi;
}

double SmoothedModel::operator()(double y) const { return std::exp(log_value(y)); }

Eigen::VectorXd pearson_residuals(const Eigen::VectorXd& y, const Theta& theta, const Control& control) {
  require_sample(y, 1);
  const WeightFunction wf(y, theta, control);
  Eigen::VectorXd delta(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) delta[j] = wf.delta(y[j]);
  return delta;
}

Eigen::VectorXd wle_weights(const Eigen::VectorXd& y, const Theta& theta, const Control& control) {
  return wle_weights_at(y, y, theta, control);
}

Eigen::VectorXd wle_weights_at(const Eigen::VectorXd& points, const Eigen::VectorXd& data, const Theta& theta,
                               const Control& control) {
  require_sample(data, 1);
  const WeightFunction wf(data, theta, control);
  Eigen::VectorXd w(points.size());
  for (Eigen::Index j = 0; j < points.size(); ++j) w[j] = wf(points[j]);
  return w;
}

double weighted_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Theta& theta) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (w[j] != 0.0) acc += w[j] * log_density(y[j], theta);
  }
  return acc;
}

Eigen::Vector3d weighted_score(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Theta& theta) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (w[j] != 0.0) acc += w[j] * score(y[j], theta);
  }
  return acc;
}

WeightedMaximum maximize_weighted_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Theta& start,
                                         ParameterSpace space, int max_it) {
  if (w.size() != y.size()) throw DomainError("weights must have one entry per observation");
  Eigen::VectorXd phi = phi_of(start, space);
  Evaluation ev = evaluate(y, w, phi, space);
  if (!std::isfinite(ev.value)) throw EstimationError("log-likelihood is not finite at the starting value");

  WeightedMaximum out{start, 0, false};
  for (int it = 1; it <= max_it; ++it) {
    out.iterations = it;
    // Newton direction on the absolute-value modified Hessian, which is
    // positive definite and equals -H near a maximum.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-ev.hess);
    Eigen::VectorXd e = eig.eigenvalues().cwiseAbs();
    const double floor = std::max(1e-10 * e.maxCoeff(), 1e-300);
    e = e.cwiseMax(floor);
    const Eigen::VectorXd d = eig.eigenvectors() * (eig.eigenvectors().transpose() * ev.grad).cwiseQuotient(e);
    const double decrement = ev.grad.dot(d);
    const double scale = std::max(1.0, std::abs(ev.value));

    if (decrement <= 1e-15 * scale) {
      const Eigen::VectorXd next = phi + d;
      const Evaluation en = evaluate(y, w, next, space);
      if (std::isfinite(en.value) && en.value >= ev.value - 1e-12 * scale) {
        phi = next;
        ev = en;
      }
      out.converged = true;
      break;
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      const Eigen::VectorXd next = phi + alpha * d;
      Evaluation en = evaluate(y, w, next, space);
      if (std::isfinite(en.value) && en.value >= ev.value + 1e-4 * alpha * decrement) {
        phi = next;
        ev = std::move(en);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = decrement <= 1e-8 * scale;
      break;
    }
    if ((alpha * d).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + phi.cwiseAbs().maxCoeff())) {
      out.converged = true;
      break;
    }
  }
  out.theta = theta_of(phi, space);
  return out;
}

FitResult ml_fit(const Eigen::VectorXd& y, const Theta& start, const Control& control, ParameterSpace space) {
  control.validate();
  require_sample(y, 4);
  const Eigen::VectorXd data = sorted_copy(y);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(data.size());
  const WeightedMaximum m = maximize_weighted_loglik(data, ones, start, space, std::max(control.max_it, 100));
  return make_result(Method::ML, m.theta, data, ones, m.iterations, m.converged);
}

FitResult fiwl_fit(const Eigen::VectorXd& y, const Theta& start, const Control& control, ParameterSpace space) {
  control.validate();
  require_sample(y, 4);
  const Eigen::VectorXd data = sorted_copy(y);

  Theta theta = space == ParameterSpace::Full ? start : Theta(start.mu(), start.sigma(), start.sigma());
  Eigen::VectorXd w = wle_weights(data, theta, control);
  bool converged = false;
  int it = 0;
  for (it = 1; it <= control.max_it; ++it) {
    if (!(w.array() > 0.0).any()) throw EstimationError("every observation received weight zero");
    const WeightedMaximum m = maximize_weighted_loglik(data, w, theta, space, std::max(control.max_it, 100));
    const double change = (m.theta.vector() - theta.vector()).cwiseAbs().maxCoeff();
    theta = m.theta;
    w = wle_weights(data, theta, control);
    if (change <= control.refine_tol * std::max(1.0, theta.vector().cwiseAbs().maxCoeff())) {
      Eigen::Vector3d z = weighted_score(data, w, theta);
      if (space == ParameterSpace::SigmaEqualsLambda) z = Eigen::Vector3d(z[0], z[1] + z[2], 0.0);
      if (z.cwiseAbs().maxCoeff() < 1e-6) {
        converged = true;
        break;
      }
    }
  }
  return make_result(Method::WL, theta, data, w, std::min(it, control.max_it), converged);
}

Eigen::Matrix3d oneswl_information(const Eigen::VectorXd& y, const Theta& theta, const Control& control) {
  require_sample(y, 1);
  const WeightFunction wf(y, theta, control);
  return information_with(wf, theta, control.nexp);
}

FitResult oneswl_fit(const Eigen::VectorXd& y, const Theta& start, const Control& control) {
  control.validate();
  require_sample(y, 4);
  const Eigen::VectorXd data = sorted_copy(y);
  const Eigen::Index n = data.size();
  const WeightFunction wf(data, start, control);

  Eigen::VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) w[j] = wf(data[j]);
  const Eigen::Vector3d s = weighted_score(data, w, start) / static_cast<double>(n);
  const Eigen::Matrix3d info = -information_with(wf, start, control.nexp);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(info);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.cwiseAbs().maxCoeff())) {
    throw EstimationError("one-step J matrix is singular or indefinite (eigenvalues " + std::to_string(ev[0]) + ", " +
                          std::to_string(ev[1]) + ", " + std::to_string(ev[2]) +
                          "); use the fully iterated estimator (WL)");
  }
  const Eigen::Vector3d delta = eig.eigenvectors() * (eig.eigenvectors().transpose() * s).cwiseQuotient(ev);
  const Eigen::Vector3d next = start.vector() + control.step * delta;
  if (!next.allFinite() || !(next[1] > 0.0)) throw EstimationError("one-step estimate left the parameter space");
  return make_result(Method::OneWL, Theta::from_vector(next), data, w, 1, true);
}

}  // namespace rlg
