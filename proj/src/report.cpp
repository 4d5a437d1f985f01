#include "rlg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

#include "rlg/errors.hpp"

namespace rlg {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double read_number(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Eigen::VectorXd vector_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = read_number(a[i]);
  return v;
}

json interval_json(const Interval& i) {
  return {{"estimate", number(i.estimate)}, {"se", number(i.se)}, {"lower", number(i.lower)},
          {"upper", number(i.upper)}};
}

std::string percent(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", 100.0 * level);
  return buf;
}

void interval_block(std::ostream& os, const std::string& label, const Interval& i, double level) {
  os << label << format_number(i.estimate) << " s.e.  " << format_number(i.se) << " \n";
  os << "( " << format_number(i.lower) << " ,  " << format_number(i.upper) << " ) \n";
  os << percent(level) << " percent confidence interval\n";
}

// Type-7 quantile of a sorted vector.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double h = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void weights_block(std::ostream& os, const Eigen::VectorXd& w) {
  const double eps = 0.1 / static_cast<double>(std::max<Eigen::Index>(w.size(), 1));
  std::vector<double> rest;
  for (double x : w) {
    if (std::abs(1.0 - x) >= eps) rest.push_back(x);
  }
  const auto ones = static_cast<std::size_t>(w.size()) - rest.size();
  os << "Robustness weights: \n";
  if (rest.empty()) {
    os << " All " << ones << " weights are ~= 1.\n";
    return;
  }
  std::sort(rest.begin(), rest.end());
  double mean = 0.0;
  for (double x : rest) mean += x;
  mean /= static_cast<double>(rest.size());
  os << " " << ones << " weights are ~= 1. The remaining " << rest.size() << " ones are summarized as\n";
  const std::vector<std::string> heads = {"Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max."};
  const std::vector<double> values = {rest.front(), sorted_quantile(rest, 0.25), sorted_quantile(rest, 0.5), mean,
                                      sorted_quantile(rest, 0.75), rest.back()};
  std::vector<std::string> cells;
  std::size_t width = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    cells.push_back(format_number(values[i]));
    width = std::max({width, cells.back().size(), heads[i].size()});
  }
  for (std::size_t i = 0; i < heads.size(); ++i) {
    os << std::string(width - heads[i].size() + (i ? 1 : 0), ' ') << heads[i];
  }
  os << " \n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << std::string(width - cells[i].size() + (i ? 1 : 0), ' ') << cells[i];
  }
  os << " \n";
}

std::string long_name(const std::string& p) {
  if (p == "mu") return "location";
  if (p == "sigma") return "scale";
  return "shape";
}

std::string format_pvalue(double p) {
  if (p < 2.2e-16) return "< 2.2e-16";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", p);
  return std::string("= ") + buf;
}

std::string format_digits(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

std::string format_number(double x, int digits) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  const double mag = std::abs(x);
  if (mag >= std::pow(10.0, digits) && mag < 1e15) {
    const double unit = std::pow(10.0, std::floor(std::log10(mag)) - digits + 1);
    std::snprintf(buf, sizeof buf, "%.0f", std::round(x / unit) * unit);
  } else {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  }
  return buf;
}

nlohmann::json to_json(const Control& c) {
  return {{"tuning_rho", c.tuning_rho},
          {"tuning_psi", c.tuning_psi},
          {"bdp", c.bdp},
          {"n_resample", c.n_resample},
          {"max_it", c.max_it},
          {"refine_tol", c.refine_tol},
          {"lower", c.lower},
          {"upper", c.upper},
          {"grid_n", c.grid_n},
          {"bw", c.bw},
          {"subdivisions", c.subdivisions},
          {"raf", to_string(c.raf.family)},
          {"raf_tau", number(c.raf.tau)},
          {"minw", c.minw},
          {"nexp", c.nexp},
          {"step", c.step},
          {"seed", c.seed}};
}

nlohmann::json to_json(const FitResult& fit) {
  json profile = json::array();
  for (const auto& p : fit.profile) {
    profile.push_back({{"lambda", number(p.lambda)}, {"mu", number(p.mu)}, {"sigma", number(p.sigma)},
                       {"tau", number(p.tau)}});
  }
  return {{"schema", kJsonSchema},
          {"method", to_string(fit.method)},
          {"mu", fit.theta.mu()},
          {"sigma", fit.theta.sigma()},
          {"lambda", fit.theta.lambda()},
          {"eta", number(fit.eta)},
          {"weights", vector_json(fit.weights)},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"data", vector_json(fit.data)},
          {"tau", number(fit.tau)},
          {"profile", profile}};
}

FitResult fit_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("schema", 0) != kJsonSchema) throw UsageError("unsupported fit JSON schema");
  FitResult fit;
  fit.method = parse_method(j.at("method").get<std::string>());
  fit.theta = Theta(j.at("mu").get<double>(), j.at("sigma").get<double>(), j.at("lambda").get<double>());
  fit.eta = read_number(j.at("eta"));
  fit.weights = vector_from(j.at("weights"));
  fit.iterations = j.at("iterations").get<int>();
  fit.converged = j.at("converged").get<bool>();
  fit.data = vector_from(j.at("data"));
  fit.tau = read_number(j.at("tau"));
  for (const auto& p : j.at("profile")) {
    fit.profile.push_back({read_number(p.at("lambda")), read_number(p.at("mu")), read_number(p.at("sigma")),
                           read_number(p.at("tau"))});
  }
  return fit;
}

nlohmann::json to_json(const FitSummary& s) {
  json cov = json::array();
  for (int i = 0; i < 3; ++i) cov.push_back({s.cov(i, 0), s.cov(i, 1), s.cov(i, 2)});
  json quantiles = json::array();
  for (const auto& q : s.quantiles) {
    json e = interval_json(q.interval);
    e["p"] = q.p;
    quantiles.push_back(e);
  }
  return {{"conf_level", s.conf_level},
          {"se", {{"mu", s.se[0]}, {"sigma", s.se[1]}, {"lambda", s.se[2]}}},
          {"cov", cov},
          {"mu", interval_json(s.parameters[0])},
          {"sigma", interval_json(s.parameters[1])},
          {"lambda", interval_json(s.parameters[2])},
          {"eta", s.eta ? interval_json(*s.eta) : json(nullptr)},
          {"quantiles", quantiles}};
}

nlohmann::json to_json(const TestResult& t) {
  json out = {{"statistic", t.statistic},
              {"df", t.df},
              {"p_value", t.p_value},
              {"conf_level", t.conf_level},
              {"conf_int", t.conf_int ? json::array({t.conf_int->first, t.conf_int->second}) : json(nullptr)}};
  if (t.null_theta) {
    out["null_theta"] = {{"mu", t.null_theta->mu()}, {"sigma", t.null_theta->sigma()},
                         {"lambda", t.null_theta->lambda()}};
  } else {
    out["null_theta"] = nullptr;
  }
  json restricted = json::object();
  for (std::size_t i = 0; i < t.parameters.size(); ++i) {
    restricted[t.parameters[i]] = {{"estimate", t.estimates[i]}, {"null", t.null_values[i]}};
  }
  out["restricted"] = restricted;
  return out;
}

std::string format_fit_text(const FitResult& fit, const std::optional<FitSummary>& summary,
                            const std::string& summary_error) {
  std::ostringstream os;
  os << "Call:\nloggammarob(method = \"" << to_string(fit.method) << "\")\n\n";
  if (!summary) {
    os << "Location:  " << format_number(fit.theta.mu()) << "  Scale:  " << format_number(fit.theta.sigma())
       << "  Shape:  " << format_number(fit.theta.lambda()) << "  E(exp(X)):  " << format_number(fit.eta) << "\n";
    if (!summary_error.empty()) os << "\nNo standard errors: " << summary_error << "\n";
  } else {
    const FitSummary& s = *summary;
    interval_block(os, "Location:  ", s.parameters[0], s.conf_level);
    os << "\n";
    interval_block(os, "Scale:  ", s.parameters[1], s.conf_level);
    os << "\n";
    interval_block(os, "Shape:  ", s.parameters[2], s.conf_level);
    os << "\n";
    if (s.eta) {
      interval_block(os, "Mean(exp(X)):  ", *s.eta, s.conf_level);
    } else {
      os << "Mean(exp(X)):  not finite (1 + sigma * lambda <= 0)\n";
    }
    os << "\n";
    for (const auto& q : s.quantiles) {
      os << "\n";
      interval_block(os, "Quantile of order  " + format_number(q.p) + " :  ", q.interval, s.conf_level);
      os << "\n";
    }
    os << "\n\n";
  }
  if (!fit.converged) os << "Warning: the estimator did not converge (" << fit.iterations << " iterations)\n";
  if (fit.method != Method::ML && fit.weights.size() > 0) {
    os << "\n";
    weights_block(os, fit.weights);
  }
  return os.str();
}

std::string format_wald_text(const TestResult& t, Method method) {
  std::ostringstream os;
  os << "\tWeighted Wald Test based on " << to_string(method) << "\n\n";
  os << "data:  \n";
  os << "ww = " << format_digits(std::round(t.statistic * 1e4) / 1e4, 8) << ", df = " << t.df << ", p-value "
     << format_pvalue(t.p_value) << "\n";
  std::vector<std::string> names;
  std::vector<std::string> nulls;
  std::vector<std::string> estimates;
  for (std::size_t i = 0; i < t.parameters.size(); ++i) {
    names.push_back(long_name(t.parameters[i]));
    nulls.push_back(format_digits(t.null_values[i], 7));
    estimates.push_back(format_digits(t.estimates[i], 7));
  }
  if (names.size() == 1) {
    os << "alternative hypothesis: true " << names[0] << " is not equal to " << nulls[0] << "\n";
  } else {
    os << "alternative hypothesis: true (" << join(names, ", ") << ") is not equal to (" << join(nulls, ", ")
       << ")\n";
  }
  if (t.conf_int) {
    os << percent(t.conf_level) << " percent confidence interval:\n";
    os << " " << format_digits(t.conf_int->first, 9) << " " << format_digits(t.conf_int->second, 9) << "\n";
  }
  os << "sample estimates:\n[1] " << join(estimates, " ") << "\n";
  return os.str();
}

std::string format_wilks_text(const TestResult& t, Method method) {
  std::ostringstream os;
  os << "\tWeighted Wilks Test based on " << to_string(method) << "\n\n";
  os << "data:  \n";
  os << "ww = " << format_digits(std::round(t.statistic * 1e3) / 1e3, 8) << ", df = " << t.df << ", p-value "
     << format_pvalue(t.p_value) << "\n";
  os << "alternative hypothesis: true scale is not equal to shape\n";
  if (t.null_theta) {
    os << "estimates under the null:\n";
    os << " mu0 = " << format_number(t.null_theta->mu(), 5) << "  sigma0 = lambda0 = "
       << format_number(t.null_theta->sigma(), 4) << "\n";
  }
  return os.str();
}

}  // namespace rlg
