#pragma once

#include <cstdint>
#include <string>

namespace rlg {

/// Residual adjustment function used to turn Pearson residuals into weights.
struct RafKind {
  enum class Family { NED, GKL, PWD, HD, SCHI2 };

  Family family = Family::NED;
  /// Family member for GKL (0 <= tau <= 1) and PWD (tau != 0, may be +inf).
  double tau = 1.0;

  static RafKind ned() { return {Family::NED, 1.0}; }
  static RafKind gkl(double tau) { return {Family::GKL, tau}; }
  static RafKind pwd(double tau) { return {Family::PWD, tau}; }
  static RafKind hd() { return {Family::HD, 2.0}; }
  static RafKind schi2() { return {Family::SCHI2, 1.0}; }

  /// Throws UsageError when tau is outside the family's range.
  void validate() const;

  friend bool operator==(const RafKind&, const RafKind&) = default;
};

std::string to_string(RafKind::Family family);
/// Accepts "ned", "gkl", "pwd", "hd", "schi2" in any case.
RafKind::Family parse_raf_family(const std::string& name);

/// Tuning constants of every estimator in the library.
struct Control {
  // tau scale
  double tuning_rho = 1.548;  ///< c1, M-scale tuning
  double tuning_psi = 6.08;   ///< c2, efficiency tuning
  double bdp = 0.5;           ///< b, M-scale target

  // resampling + IRWLS
  int n_resample = 500;
  int max_it = 100;
  double refine_tol = 1e-7;

  // lambda grid
  double lower = -3.0;
  double upper = 3.0;
  int grid_n = 61;

  // weighted likelihood
  double bw = 0.3;
  int subdivisions = 100;
  RafKind raf = RafKind::ned();
  double minw = 0.04;
  int nexp = 1000;
  double step = 1.0;

  std::uint64_t seed = 20151001;
  /// Worker threads for the lambda grid; results do not depend on it.
  int threads = 1;

  void validate() const;

  friend bool operator==(const Control&, const Control&) = default;
};

}  // namespace rlg
