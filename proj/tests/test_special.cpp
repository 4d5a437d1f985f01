#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rlg/special.hpp"

using namespace rlg::special;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

}  // namespace

// Reference values below were computed once with mpmath at 40 digits.

TEST_CASE("stirling remainder and its derivatives") {
  struct Row {
    double a, s, d1, d2;
  };
  const Row rows[] = {
      {0.1, 0.51274008133191494448, -3.1211698474170311112, 41.433299150792758817},
      {0.7, 0.11326370211474024839, -0.14906289547348795012, 0.38506956485787593297},
      {2.5, 0.033162873519936287485, -0.013134091228911877958, 0.010357756100234864973},
      {10, 0.0083305634333628712565, -0.00083250392732457637054, 0.0001663356816857461222},
      {123.25, 0.00067613103833426083187, -5.4858261347665290085e-6, 8.9018905045175550201e-8},
      {1e6, 8.3333333333330555556e-8, -8.3333333333325e-14, 1.6666666666663333333e-19},
  };
  for (const auto& r : rows) {
    CAPTURE(r.a);
    CHECK(rel_close(stirling_remainder(r.a), r.s, 1e-12));
    CHECK(rel_close(stirling_remainder_d1(r.a), r.d1, 1e-11));
    CHECK(rel_close(stirling_remainder_d2(r.a), r.d2, 1e-10));
  }
}

TEST_CASE("digamma and trigamma") {
  struct Row {
    double x, psi, tri;
  };
  const Row rows[] = {
      {0.3, -3.502524222200132989, 12.245364546107730465},
      {1, -0.57721566490153286061, 1.6449340668482264365},
      {4.5, 1.3888709263595289015, 0.24872510303901037518},
      {17, 2.8035133283274603684, 0.060587533403239361782},
      {250, 5.519459584531046417, 0.0040080106666325337234},
  };
  for (const auto& r : rows) {
    CAPTURE(r.x);
    CHECK(rel_close(digamma(r.x), r.psi, 1e-13));
    CHECK(rel_close(trigamma(r.x), r.tri, 1e-12));
  }
}

TEST_CASE("regularized incomplete gamma") {
  struct Row {
    double a, x, p, q;
  };
  const Row rows[] = {
      {0.5, 0.2, 0.47291074313446191487, 0.52708925686553808513},
      {1, 1, 0.6321205588285576784, 0.3678794411714423216},
      {3, 2.5, 0.456186884116670482, 0.543813115883329518},
      {10, 15, 0.93014633930059023231, 0.069853660699409767692},
      {50, 40, 0.070335066659394954437, 0.92966493334060504556},
      {2500, 2400, 0.021659687865363329415, 0.97834031213463667059},
      {1e5, 100300, 0.82863631125120764767, 0.17136368874879235233},
  };
  for (const auto& r : rows) {
    CAPTURE(r.a);
    CAPTURE(r.x);
    const GammaTail t = regularized_gamma(r.a, r.x);
    CHECK(rel_close(t.lower, r.p, 1e-11));
    CHECK(rel_close(t.upper, r.q, 1e-11));
    const GammaTail tl = regularized_gamma_log(r.a, std::log(r.x / r.a));
    CHECK(rel_close(tl.lower, r.p, 1e-11));
    CHECK(rel_close(tl.upper, r.q, 1e-11));
  }
  // Large shape, Temme branch.
  CHECK(rel_close(regularized_gamma(1e7, 9.99e6).upper, 0.9992198467847479513, 1e-11));
}

TEST_CASE("incomplete gamma against quadrature of the gamma density") {
  for (double a : {0.8, 2.0, 7.5}) {
    for (double x : {0.3, 1.7, 6.0}) {
      const double lg = std::lgamma(a);
      const double p = oracle::integrate([&](double t) { return t <= 0 ? 0.0 : std::exp((a - 1) * std::log(t) - t - lg); },
                                         0.0, x, 1e-14);
      CAPTURE(a);
      CAPTURE(x);
      CHECK(regularized_gamma(a, x).lower == doctest::Approx(p).epsilon(1e-9));
    }
  }
}

TEST_CASE("normal distribution") {
  const double probs[] = {1e-10, 0.001, 0.025, 0.3, 0.975, 0.999999};
  // Quantiles of the binary values of the probabilities above.
  const double quants[] = {-6.3613409024040561991, -3.0902323061678135354, -1.9599639845400542118,
                           -0.52440051270804081597, 1.9599639845400538556, 4.7534243088170877657};
  for (int i = 0; i < 6; ++i) CHECK(rel_close(normal_quantile(probs[i]), quants[i], 1e-13));
  CHECK(normal_quantile(0.5) == 0.0);

  CHECK(rel_close(normal_cdf(-8), 6.2209605742717841235e-16, 1e-12));
  CHECK(rel_close(normal_cdf(-1.5), 0.066807201268858066004, 1e-14));
  CHECK(normal_cdf(0) == 0.5);
  CHECK(rel_close(normal_cdf(2), 0.9772498680518207928, 1e-14));
  CHECK(rel_close(normal_ccdf(10), 7.6198530241605260704e-24, 1e-12));
  CHECK(normal_pdf(0.7) == doctest::Approx(oracle::phi(0.7)).epsilon(1e-15));
}

TEST_CASE("chi-squared upper tail") {
  CHECK(rel_close(chisq_upper_tail(3.84, 1), 0.050043521248705098948, 1e-12));
  CHECK(rel_close(chisq_upper_tail(4.5876, 1), 0.032204077914285348522, 1e-12));
  CHECK(rel_close(chisq_upper_tail(10, 2), 0.0067379469990854670966, 1e-12));
  CHECK(rel_close(chisq_upper_tail(7.5, 3), 0.057558451972636406967, 1e-12));
  CHECK(rel_close(chisq_upper_tail(80, 1), 3.7440973842028987636e-19, 1e-10));
  CHECK(chisq_upper_tail(0, 1) == 1.0);
}
