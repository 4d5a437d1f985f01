#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "rlg/theta.hpp"

namespace rlg {

enum class Method { QTau, WQTau, OneWL, WL, ML };

/// Method names as used on the command line: "QTau", "WQTau", "oneWL", "WL", "ML".
std::string to_string(Method method);
Method parse_method(const std::string& name);

/// tau scale reached at one point of the lambda grid.
struct GridPoint {
  double lambda = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double tau = 0.0;  ///< +inf when the grid point was degenerate

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct FitResult {
  Method method = Method::ML;
  Theta theta{0.0, 1.0, 0.0};
  /// E(exp(y)) at theta; NaN when the moment does not exist.
  double eta = 0.0;
  /// Robustness weights aligned with `data`.
  Eigen::VectorXd weights;
  /// Sorted input sample.
  Eigen::VectorXd data;
  int iterations = 0;
  bool converged = true;
  /// Minimal tau scale (QTau / WQTau only, NaN otherwise).
  double tau = 0.0;
  /// tau(lambda) over the grid (QTau / WQTau only).
  std::vector<GridPoint> profile;
};

}  // namespace rlg
