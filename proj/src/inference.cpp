#include "rlg/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rlg/distribution.hpp"
#include "rlg/errors.hpp"
#include "rlg/special.hpp"
#include "rlg/weighted_likelihood.hpp"

namespace rlg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double critical_value(double conf_level) {
  if (!(conf_level > 0.0 && conf_level < 1.0)) throw UsageError("confidence level must lie in (0, 1)");
  return special::normal_quantile(0.5 * (1.0 + conf_level));
}

Interval make_interval(double estimate, double se, double z) { return {estimate, se, estimate - z * se, estimate + z * se}; }

double log_mean_exp(double mu, double sigma, double lambda) { return std::log(mean_exp(Theta(mu, sigma, lambda))); }

std::optional<Interval> eta_interval(const Theta& t, const Eigen::Matrix3d& cov, double z) {
  if (!(1.0 + t.sigma() * t.lambda() > 0.0)) return std::nullopt;
  const double eta = mean_exp(t);
  Eigen::Vector3d g(1.0, 0.0, 0.0);
  try {
    const double hs = 1e-5 * std::max(1.0, t.sigma());
    const double hl = 1e-5 * std::max(1.0, std::abs(t.lambda()));
    g[1] = (log_mean_exp(t.mu(), t.sigma() + hs, t.lambda()) - log_mean_exp(t.mu(), t.sigma() - hs, t.lambda())) /
           (2.0 * hs);
    g[2] = (log_mean_exp(t.mu(), t.sigma(), t.lambda() + hl) - log_mean_exp(t.mu(), t.sigma(), t.lambda() - hl)) /
           (2.0 * hl);
  } catch (const DomainError&) {
    // A neighbour crosses the divergence boundary; no delta-method interval.
    return Interval{eta, kNaN, kNaN, kNaN};
  }
  g *= eta;
  return make_interval(eta, std::sqrt(g.dot(cov * g)), z);
}

Interval quantile_interval(double p, const Theta& t, const Eigen::Matrix3d& cov, double z) {
  const double q = standard_quantile(p, t.lambda());
  const double h = 1e-5 * std::max(1.0, std::abs(t.lambda()));
  const double dq = (standard_quantile(p, t.lambda() + h) - standard_quantile(p, t.lambda() - h)) / (2.0 * h);
  const Eigen::Vector3d g(1.0, q, t.sigma() * dq);
  return make_interval(t.mu() + t.sigma() * q, std::sqrt(g.dot(cov * g)), z);
}

Theta project_to_curve(const Eigen::VectorXd& sorted, const Theta& start) {
  if (start.sigma() == start.lambda()) return start;
  const double s = start.lambda() > 0.0 ? 0.5 * (start.sigma() + start.lambda()) : std::max(start.sigma(), 1e-3);
  const Eigen::Index n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return Theta(median - s * standard_quantile(0.5, s), s, s);
}

}  // namespace

Eigen::Matrix3d covariance(const FitResult& fit) {
  if (fit.weights.size() != fit.data.size()) throw DomainError("covariance: weights and data differ in length");
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  for (Eigen::Index j = 0; j < fit.data.size(); ++j) {
    if (fit.weights[j] != 0.0) info -= fit.weights[j] * score_jacobian(fit.data[j], fit.theta);
  }
  info = 0.5 * (info + info.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(info);
  const Eigen::Vector3d e = eig.eigenvalues();
  const double cond = e.minCoeff() > 0.0 ? e.maxCoeff() / e.minCoeff() : std::numeric_limits<double>::infinity();
  if (!info.allFinite() || !(cond < 1e14)) {
    std::ostringstream msg;
    msg << "weighted information is singular or indefinite (condition number " << cond << ")";
    throw EstimationError(msg.str());
  }
  Eigen::Matrix3d cov = eig.eigenvectors() * e.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (cov + cov.transpose());
}

FitSummary summarize(const FitResult& fit, const std::vector<double>& probs, double conf_level) {
  const double z = critical_value(conf_level);
  FitSummary s;
  s.theta = fit.theta;
  s.conf_level = conf_level;
  s.cov = covariance(fit);
  s.se = s.cov.diagonal().cwiseSqrt();
  const Eigen::Vector3d est = fit.theta.vector();
  for (int i = 0; i < 3; ++i) s.parameters.push_back(make_interval(est[i], s.se[i], z));
  s.eta = eta_interval(fit.theta, s.cov, z);
  for (double p : probs) {
    if (!(p > 0.0 && p < 1.0)) throw UsageError("quantile probabilities must lie in (0, 1)");
    s.quantiles.push_back({p, quantile_interval(p, fit.theta, s.cov, z)});
  }
  return s;
}

TestResult wald_test(const Theta& theta, const Eigen::Matrix3d& cov, const NullSpec& null, double conf_level) {
  const double z = critical_value(conf_level);
  std::vector<int> idx;
  std::vector<double> values;
  const std::optional<double> fixed[3] = {null.mu, null.sigma, null.lambda};
  for (int i = 0; i < 3; ++i) {
    if (fixed[i]) {
      if (!std::isfinite(*fixed[i])) throw UsageError("null values must be finite");
      idx.push_back(i);
      values.push_back(*fixed[i]);
    }
  }
  if (idx.empty()) throw UsageError("the null hypothesis must fix at least one parameter");

  const auto k = static_cast<Eigen::Index>(idx.size());
  const Eigen::Vector3d est = theta.vector();
  Eigen::VectorXd d(k);
  Eigen::MatrixXd c(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    d[a] = est[idx[a]] - values[a];
    for (Eigen::Index b = 0; b < k; ++b) c(a, b) = cov(idx[a], idx[b]);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(c);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw EstimationError("restricted covariance is not positive definite");
  }

  TestResult r;
  r.statistic = d.dot(ldlt.solve(d));
  r.df = static_cast<int>(k);
  r.p_value = special::chisq_upper_tail(r.statistic, r.df);
  r.conf_level = conf_level;
  static const char* names[3] = {"mu", "sigma", "lambda"};
  for (Eigen::Index a = 0; a < k; ++a) {
    r.parameters.emplace_back(names[idx[a]]);
    r.estimates.push_back(est[idx[a]]);
    r.null_values.push_back(values[a]);
  }
  if (k == 1) {
    const double se = std::sqrt(c(0, 0));
    r.conf_int = std::make_pair(r.estimates[0] - z * se, r.estimates[0] + z * se);
  }
  return r;
}

TestResult weighted_wald_test(const FitResult& fit, const NullSpec& null, double conf_level) {
  if (null.count() == 0) throw UsageError("the null hypothesis must fix at least one parameter");
  return wald_test(fit.theta, covariance(fit), null, conf_level);
}

FitResult constrained_fit_sigma_eq_lambda(const Eigen::VectorXd& y, const Theta& start, Method method,
                                          const Control& control, const Eigen::VectorXd& frozen_weights) {
  Eigen::VectorXd data = y;
  std::sort(data.begin(), data.end());
  const Theta curve_start = project_to_curve(data, start);
  switch (method) {
    case Method::ML:
      return ml_fit(data, curve_start, control, ParameterSpace::SigmaEqualsLambda);
    case Method::WL:
      return fiwl_fit(data, curve_start, control, ParameterSpace::SigmaEqualsLambda);
    case Method::OneWL: {
      control.validate();
      Eigen::VectorXd w = frozen_weights;
      if (w.size() == 0) w = wle_weights(data, start, control);
      if (w.size() != data.size()) throw UsageError("frozen weights must have one entry per observation");
      const WeightedMaximum m = maximize_weighted_loglik(data, w, curve_start, ParameterSpace::SigmaEqualsLambda,
                                                         std::max(control.max_it, 100));
      FitResult fit;
      fit.method = Method::OneWL;
      fit.theta = m.theta;
      fit.eta = 1.0 + m.theta.sigma() * m.theta.lambda() > 0.0 ? mean_exp(m.theta) : kNaN;
      fit.data = data;
      fit.weights = w;
      fit.iterations = m.iterations;
      fit.converged = m.converged;
      fit.tau = kNaN;
      return fit;
    }
    default:
      throw UsageError("the sigma = lambda fit supports the methods ML, WL and oneWL");
  }
}

TestResult weighted_wilks_test(const Eigen::VectorXd& y, const FitResult& fit, const Control& control,
                               WilksWeights which) {
  if (fit.method != Method::ML && fit.method != Method::WL && fit.method != Method::OneWL) {
    throw UsageError("the Wilks test requires an ML, WL or oneWL fit");
  }
  Eigen::VectorXd data = y;
  std::sort(data.begin(), data.end());
  if (data.size() != fit.data.size() || data != fit.data) throw UsageError("the Wilks test needs the fitted sample");

  const Eigen::VectorXd frozen = fit.method == Method::OneWL ? fit.weights : Eigen::VectorXd();
  const FitResult null_fit = constrained_fit_sigma_eq_lambda(data, fit.theta, fit.method, control, frozen);
  const Eigen::VectorXd& w = which == WilksWeights::Unconstrained ? fit.weights : null_fit.weights;

  double stat = 2.0 * (weighted_loglik(data, w, fit.theta) - weighted_loglik(data, w, null_fit.theta));
  if (!std::isfinite(stat)) throw EstimationError("Wilks statistic is not finite");
  // A one-step estimate is not a maximizer, and constrained-fit weights do not
  // belong to the unconstrained optimum, so only the remaining cases are
  // internal-consistency checks.
  const bool maximizer = fit.method != Method::OneWL && which == WilksWeights::Unconstrained;
  if (stat < -1e-8 && maximizer) {
    std::ostringstream msg;
    msg << "Wilks statistic is negative (" << stat << "): the constrained fit exceeds the unconstrained one";
    throw EstimationError(msg.str());
  }
  stat = std::max(stat, 0.0);

  TestResult r;
  r.statistic = stat;
  r.df = 1;
  r.p_value = special::chisq_upper_tail(stat, 1.0);
  r.null_theta = null_fit.theta;
  return r;
}

}  // namespace rlg
