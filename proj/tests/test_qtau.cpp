#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "rlg/distribution.hpp"
#include "rlg/errors.hpp"
#include "rlg/qtau.hpp"
#include "rlg/weighted_likelihood.hpp"

using rlg::Control;
using rlg::Theta;

namespace {

Eigen::VectorXd sorted(Eigen::VectorXd y) {
  std::sort(y.begin(), y.end());
  return y;
}

// Order statistics placed exactly on the model quantile line.
Eigen::VectorXd exact_quantiles(const Theta& t, int n) {
  Eigen::VectorXd y(n);
  for (int j = 0; j < n; ++j) y[j] = rlg::quantile((j + 0.5) / n, t);
  return y;
}

Eigen::VectorXd contaminate(Eigen::VectorXd y, double fraction, double at) {
  const auto k = static_cast<Eigen::Index>(fraction * static_cast<double>(y.size()));
  y.head(k).setConstant(at);
  return y;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

Control small_grid() {
  Control c;
  c.lower = -1.0;
  c.upper = 3.0;
  c.grid_n = 41;
  return c;
}

}  // namespace

TEST_CASE("plotting positions and designs") {
  const Eigen::VectorXd u = rlg::plotting_positions(4);
  CHECK(u[0] == 0.125);
  CHECK(u[3] == 0.875);
  const auto d = rlg::make_design(sorted(rlg::sample(50, Theta(0, 1, 0.7), 3)), 0.7);
  for (Eigen::Index j = 1; j < 50; ++j) {
    CHECK(d.u_grid[j] > d.u_grid[j - 1]);
    CHECK(d.x[j] > d.x[j - 1]);
    CHECK(d.y_sorted[j] >= d.y_sorted[j - 1]);
  }
  CHECK(d.x[10] == doctest::Approx(rlg::standard_quantile(d.u_grid[10], 0.7)).epsilon(1e-15));
}

TEST_CASE("quantile residuals") {
  const Theta t(1.5, 0.8, -0.4);
  const auto d = rlg::make_design(exact_quantiles(t, 30), -0.4);
  CHECK(rlg::residuals(t, d).cwiseAbs().maxCoeff() < 1e-12);

  // n = 3 at the standard normal: plotting positions 1/6, 1/2, 5/6.
  const Eigen::Vector3d y(-2.0, 0.1, 4.0);
  const Eigen::VectorXd r = rlg::residuals(Theta(0, 1, 0), rlg::make_design(y, 0.0));
  CHECK(r[0] == doctest::Approx(-2.0 + 0.96742156610170103955).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r[2] == doctest::Approx(4.0 - 0.96742156610170103955).epsilon(1e-12));

  // Shifting mu and the data together leaves residuals unchanged.
  const Eigen::VectorXd y30 = sorted(rlg::sample(30, t, 4));
  const Eigen::VectorXd base = rlg::residuals(t, rlg::make_design(y30, -0.4));
  const Eigen::VectorXd moved = rlg::residuals(Theta(t.mu() + 7, t.sigma(), t.lambda()),
                                               rlg::make_design((y30.array() + 7).matrix(), -0.4));
  CHECK((base - moved).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lambda grid") {
  const auto g = rlg::lambda_grid(Control());
  REQUIRE(g.size() == 61);
  CHECK(g.front() == -3.0);
  CHECK(g.back() == 3.0);
  CHECK(g[30] == 0.0);
  CHECK(g[40] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("resampling pairs") {
  const auto a = rlg::draw_pairs(40, 300, 17);
  CHECK(a == rlg::draw_pairs(40, 300, 17));
  CHECK(a != rlg::draw_pairs(40, 300, 18));
  for (const auto& [i, j] : a) {
    CHECK(i != j);
    CHECK(i >= 0);
    CHECK(j < 40);
  }
}

TEST_CASE("subsample search") {
  Control control;
  // Data exactly on a line.
  const Theta t(1.0, 2.0, 0.5);
  const auto d = rlg::make_design(exact_quantiles(t, 25), 0.5);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    control.seed = seed;
    const auto fit = rlg::subsample_search(d, control);
    CHECK(fit.mu == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.sigma == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.tau < 1e-10);
  }

  // Noisy line, n = 20.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.01);
  rlg::QuantileDesign nd = rlg::make_design(Eigen::VectorXd::LinSpaced(20, 0, 1), 0.0);
  for (int j = 0; j < 20; ++j) nd.y_sorted[j] = 1 + 2 * nd.x[j] + noise(rng);
  control.seed = 5;
  const auto a = rlg::subsample_search(nd, control);
  CHECK(std::abs(a.mu - 1) < 0.1);
  CHECK(std::abs(a.sigma - 2) < 0.1);
  const auto b = rlg::subsample_search(nd, control);
  CHECK(a.mu == b.mu);
  CHECK(a.sigma == b.sigma);
  CHECK(a.tau == b.tau);

  // Best of N: a larger pool can only lower the criterion.
  control.n_resample = 2000;
  CHECK(rlg::subsample_search(nd, control).tau <= a.tau);

  rlg::QuantileDesign flat = nd;
  flat.x.setConstant(1.0);
  CHECK_THROWS_AS(rlg::subsample_search(flat, control), rlg::EstimationError);
}

TEST_CASE("IRWLS refinement") {
  Control control;
  const Theta t(-1.0, 0.5, 1.0);
  const auto d = rlg::make_design(exact_quantiles(t, 40), 1.0);
  const auto exact = rlg::irwls_refine(-1.0, 0.5, d, Eigen::VectorXd(), control);
  CHECK(exact.iterations == 1);
  CHECK(exact.tau == 0.0);
  CHECK(exact.mu == -1.0);

  // Clean normal data: close to the least squares line relative to its standard error.
  std::vector<double> mus, sigmas, diffs_mu, diffs_sigma;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Eigen::VectorXd y = sorted(rlg::sample(200, Theta(0, 1, 0), seed));
    const auto design = rlg::make_design(y, 0.0);
    const double xbar = design.x.mean();
    const double ybar = y.mean();
    const double ls_sigma = (design.x.array() - xbar).matrix().dot((y.array() - ybar).matrix()) /
                            (design.x.array() - xbar).square().sum();
    const double ls_mu = ybar - ls_sigma * xbar;
    const auto start = rlg::subsample_search(design, control);
    const auto r = rlg::irwls_refine(start.mu, start.sigma, design, Eigen::VectorXd(), control);
    CHECK(r.tau <= start.tau);
    mus.push_back(ls_mu);
    sigmas.push_back(ls_sigma);
    diffs_mu.push_back(r.mu - ls_mu);
    diffs_sigma.push_back(r.sigma - ls_sigma);
  }
  CHECK(std::abs(median(diffs_mu)) < 2 * std::sqrt(variance(mus)));
  CHECK(std::abs(median(diffs_sigma)) < 2 * std::sqrt(variance(sigmas)));
}

TEST_CASE("order statistic variances") {
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(rlg::quantile_variances(Theta(0, 1, 0), half)[0] == doctest::Approx(M_PI / 2).epsilon(1e-13));
  const Eigen::VectorXd u = rlg::plotting_positions(25);
  for (double lambda : {-1.0, 0.0, 0.8}) {
    const Eigen::VectorXd v1 = rlg::quantile_variances(Theta(0, 1, lambda), u);
    const Eigen::VectorXd v2 = rlg::quantile_variances(Theta(3, 2, lambda), u);
    CHECK((v2 - 4 * v1).cwiseAbs().maxCoeff() < 1e-10 * v2.maxCoeff());
    CHECK((v1.array() > 0).all());
  }
  const Eigen::VectorXd v = rlg::quantile_variances(Theta(0, 1, 0), u);
  for (int j = 0; j < 25; ++j) CHECK(v[j] == doctest::Approx(v[24 - j]).epsilon(1e-12));
}

TEST_CASE("Q-tau on noise-free quantiles recovers the parameters") {
  const Theta t(2.0, 0.7, 1.0);
  const auto fit = rlg::qtau_fit(exact_quantiles(t, 60), Control());
  CHECK(fit.theta.lambda() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.theta.mu() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.theta.sigma() == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(fit.tau < 1e-9);
  CHECK(fit.method == rlg::Method::QTau);
  CHECK((fit.weights.array() == 1.0).all());

  // Weighted variant started at the truth stays there.
  const auto w = rlg::wqtau_fit(exact_quantiles(t, 60), fit, Control());
  CHECK(w.theta.lambda() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.theta.mu() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(w.theta.sigma() == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(w.tau < 1e-9);
}

TEST_CASE("Q-tau selects the grid minimum and is deterministic") {
  const Eigen::VectorXd y = rlg::sample(150, Theta(0, 1, -0.5), 12);
  Control control;
  const auto a = rlg::qtau_fit(y, control);
  REQUIRE(a.profile.size() == 61);
  double best = INFINITY;
  for (const auto& p : a.profile) best = std::min(best, p.tau);
  CHECK(a.tau == best);
  const auto at = std::find_if(a.profile.begin(), a.profile.end(), [&](const auto& p) { return p.tau == best; });
  CHECK(a.theta.lambda() == at->lambda);
  CHECK(a.theta.mu() == at->mu);
  CHECK(a.theta.sigma() == at->sigma);

  const auto b = rlg::qtau_fit(y, control);
  control.threads = 3;
  const auto c = rlg::qtau_fit(y, control);
  for (const auto* f : {&b, &c}) {
    CHECK(f->theta == a.theta);
    CHECK(f->tau == a.tau);
    CHECK(f->profile == a.profile);
  }
  const auto wa = rlg::wqtau_fit(y, a, Control());
  const auto wc = rlg::wqtau_fit(y, a, control);
  CHECK(wa.theta == wc.theta);
  CHECK(wa.profile == wc.profile);
}

TEST_CASE("Q-tau is affine equivariant") {
  const Eigen::VectorXd y = rlg::sample(120, Theta(0.5, 1.2, 0.6), 31);
  const Control control;
  const auto base = rlg::qtau_fit(y, control);
  const double a = -4.0, b = 2.5;
  const auto moved = rlg::qtau_fit((a + b * y.array()).matrix(), control);
  CHECK(moved.theta.lambda() == base.theta.lambda());
  CHECK(moved.theta.mu() == doctest::Approx(a + b * base.theta.mu()).epsilon(1e-8));
  CHECK(moved.theta.sigma() == doctest::Approx(b * base.theta.sigma()).epsilon(1e-8));

  const auto wbase = rlg::wqtau_fit(y, base, control);
  const auto wmoved = rlg::wqtau_fit((a + b * y.array()).matrix(), moved, control);
  CHECK(wmoved.theta.lambda() == wbase.theta.lambda());
  CHECK(wmoved.theta.mu() == doctest::Approx(a + b * wbase.theta.mu()).epsilon(1e-8));
  CHECK(wmoved.theta.sigma() == doctest::Approx(b * wbase.theta.sigma()).epsilon(1e-8));
}

TEST_CASE("Q-tau caller weights") {
  const Eigen::VectorXd y = rlg::sample(80, Theta(0, 1, 0.3), 2);
  const Control control;
  const auto plain = rlg::qtau_fit(y, control);
  const auto ones = rlg::qtau_fit(y, control, Eigen::VectorXd::Ones(80));
  CHECK(ones.theta == plain.theta);
  // A common factor rescales tau only.
  const auto twos = rlg::qtau_fit(y, control, Eigen::VectorXd::Constant(80, 2.0));
  CHECK(twos.theta.lambda() == plain.theta.lambda());
  CHECK(twos.theta.mu() == doctest::Approx(plain.theta.mu()).epsilon(1e-9));
  CHECK(twos.tau == doctest::Approx(2 * plain.tau).epsilon(1e-9));
  CHECK_THROWS_AS(rlg::qtau_fit(y, control, Eigen::VectorXd::Zero(80)), rlg::UsageError);
  CHECK_THROWS_AS(rlg::qtau_fit(y, control, Eigen::VectorXd::Ones(5)), rlg::UsageError);
}

TEST_CASE("Q-tau input checks") {
  CHECK_THROWS_AS(rlg::qtau_fit(Eigen::VectorXd::Ones(4), Control()), rlg::DomainError);
  Eigen::VectorXd bad = Eigen::VectorXd::Ones(10);
  bad[3] = NAN;
  CHECK_THROWS_AS(rlg::qtau_fit(bad, Control()), rlg::DomainError);
  CHECK_THROWS_AS(rlg::qtau_fit(Eigen::VectorXd::Constant(10, 2.0), Control()), rlg::EstimationError);
}

TEST_CASE("Q-tau at the normal model") {
  const Control control;
  const double resolution = (control.upper - control.lower) / (control.grid_n - 1);
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto fit = rlg::qtau_fit(rlg::sample(500, Theta(0, 1, 0), 1000 + seed), control);
    const bool ok = std::abs(fit.theta.lambda()) <= resolution + 0.25 && std::abs(fit.theta.mu()) < 0.15 &&
                    std::abs(fit.theta.sigma() - 1) < 0.15;
    good += ok;
  }
  CHECK(good >= 45);
}

TEST_CASE("Q-tau resists gross outliers") {
  const Control control;
  const Theta t(0, 1, 1);
  const Eigen::VectorXd clean = rlg::sample(300, t, 77);
  const auto fit = rlg::qtau_fit(contaminate(clean, 0.2, 15.0), control);
  CHECK(std::abs(fit.theta.lambda() - 1.0) < 0.5);
  const auto ml = rlg::ml_fit(contaminate(clean, 0.2, 15.0), t);
  CHECK(std::abs(ml.theta.sigma() - 1.0) > 0.5);

  const double clean_sigma = rlg::qtau_fit(clean, control).theta.sigma();
  for (double eps : {0.1, 0.25, 0.4}) {
    CAPTURE(eps);
    CHECK(rlg::qtau_fit(contaminate(clean, eps, 1e3), control).theta.sigma() < 5 * clean_sigma);
  }
}

TEST_CASE("weighted Q-tau is more efficient at the model") {
  const Control control = small_grid();
  std::vector<double> q, w;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Eigen::VectorXd y = rlg::sample(500, Theta(0, 1, 1), 5000 + seed);
    const auto start = rlg::qtau_fit(y, control);
    q.push_back(start.theta.mu());
    w.push_back(rlg::wqtau_fit(y, start, control).theta.mu());
  }
  MESSAGE("var mu: QTau " << variance(q) << ", WQTau " << variance(w));
  CHECK(variance(w) <= variance(q));
}
