#pragma once

#include <Eigen/Core>

namespace rlg {

/// Parameters (location mu, scale sigma, shape lambda) of LG(mu, sigma, lambda).
/// Always valid: sigma > 0 and every component finite.
class Theta {
 public:
  Theta(double mu, double sigma, double lambda);

  static Theta from_vector(const Eigen::Vector3d& v) { return Theta(v[0], v[1], v[2]); }

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double lambda() const { return lambda_; }

  Eigen::Vector3d vector() const { return {mu_, sigma_, lambda_}; }

  friend bool operator==(const Theta&, const Theta&) = default;

 private:
  double mu_;
  double sigma_;
  double lambda_;
};

}  // namespace rlg
