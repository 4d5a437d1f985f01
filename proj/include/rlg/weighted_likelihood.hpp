#pragma once

// Pearson residuals, residual adjustment functions and the likelihood-type
// estimators: maximum likelihood, fully iterated weighted likelihood (FIWL)
// and one-step weighted likelihood (1SWL).

#include <Eigen/Core>
#include <vector>

#include "rlg/control.hpp"
#include "rlg/fit_result.hpp"
#include "rlg/theta.hpp"

namespace rlg {

/// A(delta). Requires delta >= -1 (and tau * delta + 1 > 0 for GKL).
double raf(const RafKind& kind, double delta);

/// min(1, [A(delta) + 1]^+ / (delta + 1)), before the minw floor. At
/// delta = -1 the right limit is used; delta = +inf gives the limit as well.
double raf_weight(const RafKind& kind, double delta);

/// Gaussian kernel density estimate, tabulated exactly on 512 points over
/// [min - 3h, max + 3h] and linearly interpolated; zero outside.
class KernelDensity {
 public:
  KernelDensity(const Eigen::VectorXd& y, double bandwidth);

  double operator()(double x) const;
  double bandwidth() const { return h_; }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  /// Trapezoidal integral over the grid.
  double integral() const;

 private:
  double h_;
  Eigen::VectorXd grid_;
  Eigen::VectorXd values_;
};

/// (1/K) sum_k phi((y - y_k) / h) / h with y_k the model quantiles of order
/// (k - 0.5) / K.
class SmoothedModel {
 public:
  SmoothedModel(const Theta& theta, double bandwidth, int k);

  double operator()(double y) const;
  /// Log of the mixture density, accurate where it underflows.
  double log_value(double y) const;
  const Eigen::VectorXd& centers() const { return centers_; }

 private:
  double h_;
  Eigen::VectorXd centers_;
};

/// delta_j = f*(y_j) / f*_theta(y_j) - 1 with bandwidth bw * sigma.
Eigen::VectorXd pearson_residuals(const Eigen::VectorXd& y, const Theta& theta, const Control& control);

/// Weights at the observations, with weights below minw set to 0.
Eigen::VectorXd wle_weights(const Eigen::VectorXd& y, const Theta& theta, const Control& control);

/// Weights at arbitrary points; the data density estimate is built from `data`.
Eigen::VectorXd wle_weights_at(const Eigen::VectorXd& points, const Eigen::VectorXd& data, const Theta& theta,
                               const Control& control);

/// Parameter space of the likelihood fits: the full model or the loggamma
/// submodel sigma = lambda.
enum class ParameterSpace { Full, SigmaEqualsLambda };

/// sum_j w_j log f(y_j; theta); observations with w_j = 0 are skipped.
double weighted_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Theta& theta);

/// sum_j w_j z(y_j; theta)
Eigen::Vector3d weighted_score(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Theta& theta);

struct WeightedMaximum {
  Theta theta{0.0, 1.0, 0.0};
  int iterations = 0;
  bool converged = false;
};

/// Maximizes weighted_loglik with the weights held fixed, by damped Newton
/// steps in (mu, log sigma, lambda) or (mu, log s) on the submodel.
WeightedMaximum maximize_weighted_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& w, const Theta& start,
                                         ParameterSpace space, int max_it);

/// Maximum likelihood; all weights 1.
FitResult ml_fit(const Eigen::VectorXd& y, const Theta& start, const Control& control = Control(),
                 ParameterSpace space = ParameterSpace::Full);

/// Alternates weight updates and fixed-weight maximization until the
/// parameter change falls below refine_tol and the weighted score vanishes.
FitResult fiwl_fit(const Eigen::VectorXd& y, const Theta& start, const Control& control,
                   ParameterSpace space = ParameterSpace::Full);

/// One scoring step theta - step * J^-1 (1/n) sum w z from `start`, with
/// J = (1/nexp) sum_k w(y_k) grad z(y_k) over model quantiles y_k. Reported
/// weights are those of the step (evaluated at `start`).
FitResult oneswl_fit(const Eigen::VectorXd& y, const Theta& start, const Control& control);

/// The 1SWL normalized J matrix at theta (exposed for tests).
Eigen::Matrix3d oneswl_information(const Eigen::VectorXd& y, const Theta& theta, const Control& control);

}  // namespace rlg
