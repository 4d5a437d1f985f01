#include "rlg/qtau.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "rlg/distribution.hpp"
#include "rlg/errors.hpp"
#include "rlg/robust_scale.hpp"

namespace rlg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Model quantiles depend only on (n, lambda); repeated fits of equally sized
// samples reuse them.
class QuantileCache {
 public:
  std::shared_ptr<const Eigen::VectorXd> get(Eigen::Index n, double lambda) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &lambda, sizeof bits);
    const Key key{n, bits};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto x = std::make_shared<Eigen::VectorXd>(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      (*x)[j] = standard_quantile((static_cast<double>(j) + 0.5) / static_cast<double>(n), lambda);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.size() >= 1024) entries_.clear();
    entries_.emplace(key, x);
    return x;
  }

 private:
  using Key = std::pair<Eigen::Index, std::uint64_t>;
  std::mutex mutex_;
  std::map<Key, std::shared_ptr<const Eigen::VectorXd>> entries_;
};

QuantileCache& quantile_cache() {
  static QuantileCache cache;
  return cache;
}

RhoParams rho_params(const Control& control) { return {control.tuning_rho, control.tuning_psi, control.bdp}; }

// Weighted least squares of y on (1, x); false when the normal equations are singular.
bool weighted_line(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const Eigen::VectorXd& w, double& mu,
                   double& sigma) {
  double sw = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    sw += w[j];
    sx += w[j] * x[j];
    sy += w[j] * y[j];
  }
  if (!(sw > 0.0)) return false;
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double dx = x[j] - xbar;
    sxx += w[j] * dx * dx;
    sxy += w[j] * dx * (y[j] - ybar);
  }
  if (!(sxx > 0.0)) return false;
  sigma = sxy / sxx;
  mu = ybar - sigma * xbar;
  return std::isfinite(mu) && std::isfinite(sigma);
}

void scaled_residuals(double mu, double sigma, const QuantileDesign& d, const Eigen::VectorXd& scales,
                      Eigen::VectorXd& r) {
  r = d.y_sorted - (mu + sigma * d.x.array()).matrix();
  if (scales.size() > 0) r.array() /= scales.array();
}

LineFit search_with_pairs(const QuantileDesign& d, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs,
                          const Eigen::VectorXd& scales, const RhoParams& params) {
  const Eigen::Index n = d.y_sorted.size();
  const Eigen::Index half = n / 2;
  Eigen::VectorXd r(n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Eigen::VectorXd ys(half);
  Eigen::VectorXd xs(half);
  Eigen::VectorXd ws(half);

  LineFit best{0.0, 0.0, kInf};
  for (const auto& [a, b] : pairs) {
    const double dx = d.x[a] - d.x[b];
    if (dx == 0.0) continue;
    const double sigma0 = (d.y_sorted[a] - d.y_sorted[b]) / dx;
    const double mu0 = d.y_sorted[a] - sigma0 * d.x[a];
    scaled_residuals(mu0, sigma0, d, scales, r);

    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::nth_element(order.begin(), order.begin() + (half - 1), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return std::abs(r[i]) < std::abs(r[j]); });
    for (Eigen::Index k = 0; k < half; ++k) {
      const Eigen::Index j = order[static_cast<std::size_t>(k)];
      ys[k] = d.y_sorted[j];
      xs[k] = d.x[j];
      ws[k] = scales.size() > 0 ? 1.0 / (scales[j] * scales[j]) : 1.0;
    }
    double mu1 = mu0;
    double sigma1 = sigma0;
    if (!weighted_line(ys, xs, ws, mu1, sigma1)) continue;
    scaled_residuals(mu1, sigma1, d, scales, r);
    const double tau = tau_scale(r, params);
    if (tau < best.tau) best = {mu1, sigma1, tau};
  }
  return best;
}

void require_sample(const Eigen::VectorXd& y, Eigen::Index min_n) {
  if (y.size() < min_n) throw DomainError("at least " + std::to_string(min_n) + " observations are required");
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (!std::isfinite(y[j])) throw DomainError("observations must be finite");
  }
}

Eigen::VectorXd sorted_copy(const Eigen::VectorXd& y) {
  Eigen::VectorXd s = y;
  std::sort(s.begin(), s.end());
  return s;
}

double eta_or_nan(const Theta& theta) {
  if (!(1.0 + theta.sigma() * theta.lambda() > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return mean_exp(theta);
}

// One grid point of either estimator.
struct GridOutcome {
  GridPoint point;
  int iterations = 0;
  bool flagged = false;
};

template <typename Fn>
std::vector<GridOutcome> over_grid(std::size_t count, int threads, Fn&& fit_at) {
  std::vector<GridOutcome> out(count);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fit_at(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fit_at(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// Smallest tau; ties go to the smallest |lambda|, then to the lower grid index.
std::size_t select_minimum(const std::vector<GridOutcome>& outcomes) {
  std::size_t best = outcomes.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const GridPoint& p = outcomes[i].point;
    if (!std::isfinite(p.tau)) continue;
    if (best == outcomes.size()) {
      best = i;
      continue;
    }
    const GridPoint& b = outcomes[best].point;
    if (p.tau < b.tau || (p.tau == b.tau && std::abs(p.lambda) < std::abs(b.lambda))) best = i;
  }
  if (best == outcomes.size()) throw EstimationError("every lambda grid point was degenerate");
  return best;
}

FitResult assemble(Method method, const Eigen::VectorXd& y_sorted, const std::vector<GridOutcome>& outcomes) {
  const std::size_t k = select_minimum(outcomes);
  const GridPoint& p = outcomes[k].point;
  FitResult fit;
  fit.method = method;
  fit.theta = Theta(p.mu, p.sigma, p.lambda);
  fit.eta = eta_or_nan(fit.theta);
  fit.data = y_sorted;
  fit.weights = Eigen::VectorXd::Ones(y_sorted.size());
  fit.iterations = outcomes[k].iterations;
  fit.converged = !outcomes[k].flagged;
  fit.tau = p.tau;
  fit.profile.reserve(outcomes.size());
  for (const auto& o : outcomes) fit.profile.push_back(o.point);
  return fit;
}

GridOutcome to_outcome(double lambda, const IrwlsResult& r) {
  GridOutcome o;
  o.point = {lambda, r.mu, r.sigma, r.tau};
  if (!(r.sigma > 0.0) || !std::isfinite(r.mu) || !std::isfinite(r.tau)) o.point.tau = kInf;
  o.iterations = r.iterations;
  o.flagged = r.flagged;
  return o;
}

// Type-7 sample quantile of the finite entries of a sorted vector.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double h = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

Eigen::VectorXd plotting_positions(Eigen::Index n) {
  Eigen::VectorXd u(n);
  for (Eigen::Index j = 0; j < n; ++j) u[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
  return u;
}

QuantileDesign make_design(const Eigen::VectorXd& y_sorted, double lambda) {
  const Eigen::Index n = y_sorted.size();
  QuantileDesign d;
  d.lambda = lambda;
  d.y_sorted = y_sorted;
  d.u_grid = plotting_positions(n);
  d.x = *quantile_cache().get(n, lambda);
  return d;
}

Eigen::VectorXd residuals(const Theta& theta, const QuantileDesign& design) {
  return design.y_sorted - (theta.mu() + theta.sigma() * design.x.array()).matrix();
}

std::vector<double> lambda_grid(const Control& control) {
  std::vector<double> grid(static_cast<std::size_t>(control.grid_n));
  if (control.grid_n == 1) {
    grid[0] = 0.5 * (control.lower + control.upper);
  } else {
    const double step = (control.upper - control.lower) / static_cast<double>(control.grid_n - 1);
    for (int i = 0; i < control.grid_n; ++i) grid[static_cast<std::size_t>(i)] = control.lower + i * step;
    grid.back() = control.upper;
  }
  for (double& v : grid) {
    if (std::abs(v) < 1e-12) v = 0.0;
  }
  return grid;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> draw_pairs(Eigen::Index n, int count, std::uint64_t seed) {
  if (n < 2) throw DomainError("draw_pairs: need at least 2 observations");
  std::mt19937_64 engine(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const Eigen::Index a = pick(engine);
    Eigen::Index b = pick(engine);
    while (b == a) b = pick(engine);
    pairs.emplace_back(a, b);
  }
  return pairs;
}

LineFit subsample_search(const QuantileDesign& design, const Control& control, const Eigen::VectorXd& scales) {
  const Eigen::Index n = design.y_sorted.size();
  if (n < 4) throw DomainError("subsample_search: at least 4 observations are required");
  if (design.x.maxCoeff() == design.x.minCoeff()) throw EstimationError("subsample_search: degenerate design");
  const auto pairs = draw_pairs(n, control.n_resample, control.seed);
  const LineFit best = search_with_pairs(design, pairs, scales, rho_params(control));
  if (!std::isfinite(best.tau)) throw EstimationError("subsample_search: no usable candidate");
  return best;
}

IrwlsResult irwls_refine(double mu, double sigma, const QuantileDesign& design, const Eigen::VectorXd& scales,
                         const Control& control) {
  const RhoParams params = rho_params(control);
  const Eigen::Index n = design.y_sorted.size();
  Eigen::VectorXd r(n);
  Eigen::VectorXd w(n);
  scaled_residuals(mu, sigma, design, scales, r);

  IrwlsResult best{mu, sigma, tau_scale(r, params), 0, false};
  double s = 0.0;
  {
    Eigen::VectorXd a = r.cwiseAbs();
    auto mid = a.begin() + n / 2;
    std::nth_element(a.begin(), mid, a.end());
    s = *mid / 0.6745;
  }
  if (!(s > 0.0)) {
    best.iterations = 1;
    return best;
  }

  for (int it = 1; it <= control.max_it; ++it) {
    best.iterations = it;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += rho(r[j] / s, params.c1);
    s *= std::sqrt(acc / (static_cast<double>(n) * params.b));
    if (!(s > 0.0) || !std::isfinite(s)) {
      best.flagged = true;
      break;
    }

    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = r[j] / s;
      num += 2.0 * rho(v, params.c2) - psi(v, params.c2) * v;
      den += psi(v, params.c1) * v;
    }
    if (den == 0.0) {
      best.flagged = true;
      break;
    }
    const double big_w = num / den;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = r[j] / s;
      w[j] = big_w * psi_over_u(v, params.c1) + psi_over_u(v, params.c2);
      if (scales.size() > 0) w[j] /= scales[j] * scales[j];
    }

    double mu_next = mu;
    double sigma_next = sigma;
    if (!weighted_line(design.y_sorted, design.x, w, mu_next, sigma_next)) {
      best.flagged = true;
      break;
    }
    const double change = std::max(std::abs(mu_next - mu), std::abs(sigma_next - sigma));
    mu = mu_next;
    sigma = sigma_next;
    scaled_residuals(mu, sigma, design, scales, r);
    const double tau = tau_scale(r, params);
    if (tau < best.tau) {
      best.mu = mu;
      best.sigma = sigma;
      best.tau = tau;
    }
    if (change <= control.refine_tol * std::max({1.0, std::abs(mu), std::abs(sigma)})) break;
  }
  return best;
}

FitResult qtau_fit(const Eigen::VectorXd& y, const Control& control, const Eigen::VectorXd& weights) {
  control.validate();
  require_sample(y, 5);
  Eigen::VectorXd scales;
  if (weights.size() > 0) {
    if (weights.size() != y.size()) throw UsageError("weights must have one entry per observation");
    if (!(weights.array() > 0.0).all() || !weights.allFinite()) throw UsageError("weights must be positive");
    scales = weights.cwiseInverse();
  }
  const Eigen::VectorXd y_sorted = sorted_copy(y);
  const auto pairs = draw_pairs(y.size(), control.n_resample, control.seed);
  const RhoParams params = rho_params(control);

  const auto grid = lambda_grid(control);
  const auto outcomes = over_grid(grid.size(), control.threads, [&](std::size_t i) {
    const double lambda = grid[i];
    const QuantileDesign design = make_design(y_sorted, lambda);
    const LineFit start = search_with_pairs(design, pairs, scales, params);
    if (!std::isfinite(start.tau)) {
      GridOutcome bad;
      bad.point = {lambda, 0.0, 0.0, kInf};
      bad.flagged = true;
      return bad;
    }
    return to_outcome(lambda, irwls_refine(start.mu, start.sigma, design, scales, control));
  });
  return assemble(Method::QTau, y_sorted, outcomes);
}

Eigen::VectorXd quantile_variances(const Theta& theta, const Eigen::VectorXd& u_grid) {
  Eigen::VectorXd v(u_grid.size());
  const double s2 = theta.sigma() * theta.sigma();
  for (Eigen::Index j = 0; j < u_grid.size(); ++j) {
    const double u = u_grid[j];
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile_variances: u must lie in (0, 1)");
    const double q = standard_quantile(u, theta.lambda());
    const double log_f = standard_log_density(q, theta.lambda());
    v[j] = s2 * u * (1.0 - u) * std::exp(-2.0 * log_f);
  }
  return v;
}

FitResult wqtau_fit(const Eigen::VectorXd& y, const FitResult& start, const Control& control) {
  control.validate();
  require_sample(y, 5);
  const Eigen::VectorXd y_sorted = sorted_copy(y);
  const Eigen::Index n = y_sorted.size();

  // Fixed per-observation scales, clamped to their 1% and 99% quantiles.
  Eigen::VectorXd scales = quantile_variances(start.theta, plotting_positions(n)).cwiseSqrt();
  std::vector<double> finite;
  for (double v : scales) {
    if (std::isfinite(v) && v > 0.0) finite.push_back(v);
  }
  if (finite.empty()) throw EstimationError("wqtau_fit: order-statistic variances are not finite");
  std::sort(finite.begin(), finite.end());
  const double lo = sorted_quantile(finite, 0.01);
  const double hi = sorted_quantile(finite, 0.99);
  for (double& v : scales) v = std::isnan(v) ? hi : std::clamp(v, lo, hi);

  const auto grid = lambda_grid(control);
  const bool profile_matches =
      start.profile.size() == grid.size() &&
      std::equal(grid.begin(), grid.end(), start.profile.begin(),
                 [](double l, const GridPoint& p) { return l == p.lambda && std::isfinite(p.tau); });

  std::vector<std::pair<double, double>> starts(grid.size(), {start.theta.mu(), start.theta.sigma()});
  if (profile_matches) {
    for (std::size_t i = 0; i < grid.size(); ++i) starts[i] = {start.profile[i].mu, start.profile[i].sigma};
  }

  const auto outcomes = over_grid(grid.size(), control.threads, [&](std::size_t i) {
    const QuantileDesign design = make_design(y_sorted, grid[i]);
    return to_outcome(grid[i], irwls_refine(starts[i].first, starts[i].second, design, scales, control));
  });
  return assemble(Method::WQTau, y_sorted, outcomes);
}

}  // namespace rlg
