#pragma once

// Quantile tau estimators.
//
// For a fixed shape lambda the order statistics y_(j) are regressed on the
// model quantiles x_j = Q*(u_j, lambda), u_j = (j - 0.5) / n, by minimizing the
// tau scale of r_j = y_(j) - mu - sigma x_j. A resampling search over exact
// 2-point fits followed by IRWLS gives (mu(lambda), sigma(lambda)); lambda is
// then chosen on an equally spaced grid. The weighted variant divides r_j by
// the asymptotic standard deviation of the j-th order statistic.

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "rlg/control.hpp"
#include "rlg/fit_result.hpp"
#include "rlg/theta.hpp"

namespace rlg {

/// Order statistics and their model quantiles for one value of lambda.
struct QuantileDesign {
  double lambda = 0.0;
  Eigen::VectorXd y_sorted;
  Eigen::VectorXd u_grid;  ///< (j - 0.5) / n
  Eigen::VectorXd x;       ///< Q*(u_j, lambda), strictly increasing
};

/// (j - 0.5) / n, j = 1..n
Eigen::VectorXd plotting_positions(Eigen::Index n);

/// `y_sorted` must be nondecreasing.
QuantileDesign make_design(const Eigen::VectorXd& y_sorted, double lambda);

/// y_(j) - mu - sigma Q*(u_j, lambda); theta.lambda() must match the design.
Eigen::VectorXd residuals(const Theta& theta, const QuantileDesign& design);

/// Equally spaced lambda grid [lower, upper] with grid_n points; values within
/// 1e-12 of zero are snapped to exactly 0.
std::vector<double> lambda_grid(const Control& control);

struct LineFit {
  double mu = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
};

/// Index pairs for the resampling search, drawn up front from `seed`.
std::vector<std::pair<Eigen::Index, Eigen::Index>> draw_pairs(Eigen::Index n, int count, std::uint64_t seed);

/// Best of `control.n_resample` candidates (2-point exact fit, least squares on
/// the floor(n/2) smallest absolute residuals, tau scale of all residuals).
/// `scales` (empty for none) divides the residuals.
LineFit subsample_search(const QuantileDesign& design, const Control& control,
                         const Eigen::VectorXd& scales = Eigen::VectorXd());

struct IrwlsResult {
  double mu = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  int iterations = 0;
  /// The iteration stopped early on a degenerate scale or weight denominator.
  bool flagged = false;
};

/// Tau-regression IRWLS from (mu, sigma). Returns the best-tau iterate seen.
IrwlsResult irwls_refine(double mu, double sigma, const QuantileDesign& design,
                         const Eigen::VectorXd& scales, const Control& control);

/// Q-tau estimate. `weights`, when non-empty, multiply the residuals
/// (r_j * w_j), i.e. act as per-observation scales 1 / w_j; aligned with the
/// sorted sample.
FitResult qtau_fit(const Eigen::VectorXd& y, const Control& control,
                   const Eigen::VectorXd& weights = Eigen::VectorXd());

/// v^2(theta, u) = sigma^2 u (1 - u) / f_lambda(Q*(u, lambda))^2 per grid point.
Eigen::VectorXd quantile_variances(const Theta& theta, const Eigen::VectorXd& u_grid);

/// Weighted Q-tau estimate started from a Q-tau fit.
FitResult wqtau_fit(const Eigen::VectorXd& y, const FitResult& start, const Control& control);

}  // namespace rlg
