#pragma once

// Standard errors, Wald intervals, the weighted Wald test and the weighted
// Wilks test of the loggamma submodel sigma = lambda.

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rlg/control.hpp"
#include "rlg/fit_result.hpp"
#include "rlg/theta.hpp"

namespace rlg {

struct Interval {
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct QuantileInterval {
  double p = 0.0;
  Interval interval;
};

struct FitSummary {
  Theta theta{0.0, 1.0, 0.0};
  Eigen::Vector3d se = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double conf_level = 0.95;
  /// mu, sigma, lambda
  std::vector<Interval> parameters;
  /// Absent when E(exp(y)) diverges.
  std::optional<Interval> eta;
  std::vector<QuantileInterval> quantiles;
};

/// (-sum_j w_j grad z(y_j; theta))^-1 over the fit's data and weights. Throws
/// EstimationError, reporting the condition number, when it is not positive
/// definite.
Eigen::Matrix3d covariance(const FitResult& fit);

FitSummary summarize(const FitResult& fit, const std::vector<double>& probs = {}, double conf_level = 0.95);

/// Parameters fixed by a Wald null hypothesis.
struct NullSpec {
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<double> lambda;

  int count() const { return mu.has_value() + sigma.has_value() + lambda.has_value(); }
};

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  /// Single restriction only.
  std::optional<std::pair<double, double>> conf_int;
  double conf_level = 0.95;
  /// Constrained estimate (Wilks test).
  std::optional<Theta> null_theta;
  /// Restricted parameters ("mu", "sigma", "lambda"), their estimates and
  /// null values (Wald test).
  std::vector<std::string> parameters;
  std::vector<double> estimates;
  std::vector<double> null_values;
};

/// Quadratic form on the restricted coordinates of (theta, cov).
TestResult wald_test(const Theta& theta, const Eigen::Matrix3d& cov, const NullSpec& null, double conf_level = 0.95);

TestResult weighted_wald_test(const FitResult& fit, const NullSpec& null, double conf_level = 0.95);

/// Fit of (mu, s) with sigma = lambda = s for the methods ML, WL and oneWL. A
/// start off the curve is moved onto it with s = (sigma + lambda) / 2 when
/// lambda > 0 and s = max(sigma, 1e-3) otherwise, mu matched at the median.
/// For oneWL the weights stay fixed: `frozen_weights` (aligned with the sorted
/// sample) when given, otherwise the weights at `start`.
FitResult constrained_fit_sigma_eq_lambda(const Eigen::VectorXd& y, const Theta& start, Method method,
                                          const Control& control,
                                          const Eigen::VectorXd& frozen_weights = Eigen::VectorXd());

enum class WilksWeights { Unconstrained, Constrained };

/// 2 sum_j w_j [l(y_j; theta) - l(y_j; theta0)] against chi-squared(1).
TestResult weighted_wilks_test(const Eigen::VectorXd& y, const FitResult& fit, const Control& control,
                               WilksWeights which = WilksWeights::Unconstrained);

}  // namespace rlg
