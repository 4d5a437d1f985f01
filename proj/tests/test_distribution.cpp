#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "rlg/distribution.hpp"
#include "rlg/errors.hpp"

using rlg::Theta;

namespace {

const double kShapes[] = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};

// Direct two-branch density formula, written independently of the library.
double reference_density(double u, double lambda) {
  if (lambda == 0.0) return oracle::phi(u);
  const double a = 1.0 / (lambda * lambda);
  return std::exp(std::log(std::abs(lambda)) - std::lgamma(a) + a * std::log(a) + a * (lambda * u - std::exp(lambda * u)));
}

// Density mass is concentrated near the mode; integrate over a wide finite range.
double total_mass(double lambda) {
  auto f = [&](double u) { return rlg::density(u, Theta(0, 1, lambda)); };
  return oracle::integrate(f, -60.0, -10.0, 1e-13) + oracle::integrate(f, -10.0, 10.0, 1e-13) +
         oracle::integrate(f, 10.0, 60.0, 1e-13);
}

struct RandomTheta {
  std::mt19937_64 rng;
  explicit RandomTheta(std::uint64_t seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  Theta theta() { return Theta(uniform(-3, 3), uniform(0.3, 3), uniform(-2.5, 2.5)); }
};

}  // namespace

TEST_CASE("density special values") {
  CHECK(rlg::density(0, Theta(0, 1, 0)) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(rlg::density(0, Theta(0, 1, 1)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(rlg::log_density(0, Theta(0, 1, 0)) == doctest::Approx(-0.9189385332046727).epsilon(1e-15));
  // Log-exponential special case.
  for (double u : {-4.0, -1.0, 0.3, 2.0}) CHECK(rlg::density(u, Theta(0, 1, 1)) == doctest::Approx(std::exp(u - std::exp(u))));
}

TEST_CASE("density matches the closed-form formula") {
  for (double lambda : kShapes) {
    for (double u = -4.0; u <= 3.0; u += 0.25) {
      CAPTURE(lambda);
      CAPTURE(u);
      CHECK(rlg::density(u, Theta(0, 1, lambda)) == doctest::Approx(reference_density(u, lambda)).epsilon(1e-11));
    }
  }
}

TEST_CASE("location-scale identity") {
  RandomTheta gen(1);
  for (int i = 0; i < 200; ++i) {
    const Theta t = gen.theta();
    const double y = gen.uniform(-6, 6);
    const double u = (y - t.mu()) / t.sigma();
    CHECK(rlg::density(y, t) == doctest::Approx(rlg::density(u, Theta(0, 1, t.lambda())) / t.sigma()).epsilon(1e-13));
    const double p = gen.uniform(0.001, 0.999);
    CHECK(rlg::quantile(p, t) == doctest::Approx(t.mu() + t.sigma() * rlg::quantile(p, Theta(0, 1, t.lambda()))).epsilon(1e-14));
  }
}

TEST_CASE("log density agrees with density and stays finite in the tails") {
  RandomTheta gen(2);
  for (int i = 0; i < 300; ++i) {
    const Theta t = gen.theta();
    const double y = t.mu() + t.sigma() * gen.uniform(-5, 5);
    const double d = rlg::density(y, t);
    if (d > 1e-300) CHECK(std::exp(rlg::log_density(y, t)) == doctest::Approx(d).epsilon(1e-12));
  }
  const double far = rlg::log_density(50, Theta(0, 1, 1));
  CHECK(std::isfinite(far));
  CHECK(far == doctest::Approx(50 - std::exp(50.0)).epsilon(1e-12));
  CHECK(rlg::density(50, Theta(0, 1, 1)) == 0.0);
}

TEST_CASE("normalization") {
  for (double lambda : kShapes) {
    CAPTURE(lambda);
    CHECK(std::abs(total_mass(lambda) - 1.0) < 1e-8);
  }
}

TEST_CASE("continuity at lambda = 0") {
  double worst = 0.0;
  for (double y = -5; y <= 5; y += 0.01)
    worst = std::max(worst, std::abs(rlg::density(y, Theta(0, 1, 1e-4)) - rlg::density(y, Theta(0, 1, 0))));
  CHECK(worst < 1e-3);
  // The same from both sides, much closer in.
  for (double y : {-2.0, 0.0, 1.5})
    CHECK(rlg::density(y, Theta(0, 1, -1e-7)) == doctest::Approx(rlg::density(y, Theta(0, 1, 1e-7))).epsilon(1e-6));
}

TEST_CASE("cdf against quadrature of the density") {
  CHECK(rlg::cdf(0, Theta(0, 1, 0)) == 0.5);
  for (double lambda : {-2.0, -0.5, 0.5, 1.0, 2.0}) {
    const Theta t(0, 1, lambda);
    auto f = [&](double u) { return rlg::density(u, t); };
    for (double y : {-3.0, -1.0, 0.0, 0.7, 2.0}) {
      const double q = oracle::integrate(f, -60.0, -10.0, 1e-14) + oracle::integrate(f, -10.0, y, 1e-14);
      CAPTURE(lambda);
      CAPTURE(y);
      CHECK(std::abs(rlg::cdf(y, t) - q) < 1e-8);
    }
  }
}

TEST_CASE("cdf is monotone with the right limits") {
  for (double lambda : kShapes) {
    const Theta t(1, 2, lambda);
    double prev = 0.0;
    for (double y = -40; y <= 40; y += 0.5) {
      const double c = rlg::cdf(y, t);
      CHECK(c >= prev);
      prev = c;
    }
    CHECK(rlg::cdf(-1e3, t) < 1e-12);
    CHECK(rlg::cdf(1e3, t) > 1 - 1e-12);
  }
}

TEST_CASE("quantile and cdf roundtrips") {
  CHECK(rlg::quantile(0.5, Theta(0, 1, 0)) == 0.0);
  CHECK(std::abs(rlg::quantile(1 - std::exp(-1.0), Theta(0, 1, 1))) < 1e-12);
  for (double lambda : kShapes) {
    const Theta t(0.3, 1.7, lambda);
    for (int k = 1; k <= 99; ++k) {
      const double p = k / 100.0;
      const double q = rlg::quantile(p, t);
      CHECK(std::abs(rlg::cdf(q, t) - p) < 1e-10);
    }
    for (double y = -4; y <= 4; y += 0.5) {
      const double p = rlg::cdf(y, t);
      if (p > 1e-8 && p < 1 - 1e-8) CHECK(std::abs(rlg::quantile(p, t) - y) < 1e-8);
    }
  }
  CHECK_THROWS_AS(rlg::quantile(0.0, Theta(0, 1, 0)), rlg::DomainError);
  CHECK_THROWS_AS(rlg::quantile(1.0, Theta(0, 1, 0.5)), rlg::DomainError);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(Theta(0, 0, 1), rlg::DomainError);
  CHECK_THROWS_AS(Theta(0, -1, 1), rlg::DomainError);
  CHECK_THROWS_AS(Theta(std::numeric_limits<double>::quiet_NaN(), 1, 1), rlg::DomainError);
}

TEST_CASE("sampling is deterministic and follows the cdf") {
  const Theta t(0.5, 1.5, -0.8);
  CHECK(rlg::sample(5, t, 99) == rlg::sample(5, t, 99));
  CHECK(rlg::sample(5, t, 99) != rlg::sample(5, t, 100));
  for (double lambda : {-1.0, 0.0, 1.0}) {
    const Theta s(0, 1, lambda);
    Eigen::VectorXd x = rlg::sample(10000, s, 7);
    std::sort(x.begin(), x.end());
    CAPTURE(lambda);
    CHECK(oracle::ks_statistic(x, [&](double y) { return rlg::cdf(y, s); }) < 1.63 / 100.0);
  }
}

TEST_CASE("mean of exp(y)") {
  CHECK(rlg::mean_exp(Theta(8.04, 0.4944, -0.6437)) == doctest::Approx(4381).epsilon(0.005));
  CHECK(rlg::mean_exp(Theta(0, 1, 1)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(rlg::mean_exp(Theta(0, 1, 0)) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK_THROWS_AS(rlg::mean_exp(Theta(0, 2, -0.5)), rlg::DomainError);

  // Quadrature of exp(y) f(y).
  for (double lambda : {-0.6, 0.4, 1.2}) {
    const Theta t(0.2, 0.6, lambda);
    auto f = [&](double y) { return std::exp(y + rlg::log_density(y, t)); };
    const double q = oracle::integrate(f, -40, 0, 1e-13) + oracle::integrate(f, 0, 40, 1e-13);
    CHECK(rlg::mean_exp(t) == doctest::Approx(q).epsilon(1e-9));
  }

  // Monte Carlo check within three standard errors.
  const Theta t(0, 0.5, 1);
  const Eigen::VectorXd x = rlg::sample(100000, t, 11).array().exp();
  const double m = x.mean();
  const double se = std::sqrt((x.array() - m).square().sum() / (x.size() - 1) / x.size());
  CHECK(std::abs(m - rlg::mean_exp(t)) < 3 * se);
}

TEST_CASE("score at the standard normal") {
  const Eigen::Vector3d z = rlg::score(0, Theta(0, 1, 0));
  CHECK(std::abs(z[0]) < 1e-15);
  CHECK(z[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(z[2]) < 1e-12);
  CHECK_THROWS_AS(rlg::score(std::numeric_limits<double>::infinity(), Theta(0, 1, 0)), rlg::DomainError);
}

TEST_CASE("score and jacobian against finite differences") {
  RandomTheta gen(3);
  for (int i = 0; i < 300; ++i) {
    const Theta t = gen.theta();
    const double y = t.mu() + t.sigma() * gen.uniform(-3, 3);
    const Eigen::Vector3d p = t.vector();
    const Eigen::Vector3d z = rlg::score(y, t);
    const Eigen::Matrix3d jac = rlg::score_jacobian(y, t);
    for (int k = 0; k < 3; ++k) {
      auto along = [&](double x) {
        Eigen::Vector3d q = p;
        q[k] = x;
        return q;
      };
      const double fd = oracle::derivative([&](double x) { return rlg::log_density(y, Theta::from_vector(along(x))); }, p[k], 1e-3);
      CAPTURE(t.vector().transpose());
      CAPTURE(y);
      CHECK(std::abs(z[k] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
      for (int r = 0; r < 3; ++r) {
        const double fdj = oracle::derivative([&](double x) { return rlg::score(y, Theta::from_vector(along(x)))[r]; }, p[k], 1e-3);
        CHECK(std::abs(jac(r, k) - fdj) < 1e-4 * std::max(1.0, std::abs(fdj)));
      }
    }
    CHECK((jac - jac.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    const auto all = rlg::log_density_derivatives(y, t);
    CHECK(all.value == doctest::Approx(rlg::log_density(y, t)).epsilon(1e-14));
    CHECK((all.gradient - z).norm() < 1e-14 * (1 + z.norm()));
  }
}

TEST_CASE("score has mean zero and the information is positive definite") {
  for (double lambda : {-1.0, 0.0, 0.5}) {
    const Theta t(0, 1, lambda);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 3; ++k) {
      auto zk = [&](double y) { return rlg::density(y, t) * rlg::score(y, t)[k]; };
      mean[k] = oracle::integrate(zk, -30, 0, 1e-12) + oracle::integrate(zk, 0, 30, 1e-12);
      for (int r = 0; r < 3; ++r) {
        auto jr = [&](double y) { return -rlg::density(y, t) * rlg::score_jacobian(y, t)(r, k); };
        info(r, k) = oracle::integrate(jr, -30, 0, 1e-12) + oracle::integrate(jr, 0, 30, 1e-12);
      }
    }
    CAPTURE(lambda);
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(info).eigenvalues().minCoeff() > 1e-3);
  }

  // Monte Carlo version within four standard errors.
  const Theta t(0.5, 0.8, 0.7);
  const Eigen::VectorXd x = rlg::sample(100000, t, 21);
  Eigen::MatrixXd z(x.size(), 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) z.row(i) = rlg::score(x[i], t).transpose();
  for (int k = 0; k < 3; ++k) {
    const double m = z.col(k).mean();
    const double se = std::sqrt((z.col(k).array() - m).square().sum() / (x.size() - 1) / x.size());
    CHECK(std::abs(m) < 4 * se);
  }
}
