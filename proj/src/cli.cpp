#include "rlg/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "rlg/distribution.hpp"
#include "rlg/errors.hpp"
#include "rlg/inference.hpp"
#include "rlg/qtau.hpp"
#include "rlg/report.hpp"
#include "rlg/weighted_likelihood.hpp"

namespace rlg::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& value) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  std::size_t used = 0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == t.size();
}

std::vector<double> parse_list(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    double v = 0.0;
    if (!parse_double(item, v)) throw UsageError("cannot parse " + what + " '" + text + "'");
    out.push_back(v);
  }
  return out;
}

// Every option shared by the estimation subcommands.
struct Options {
  std::string input = "-";
  std::string method = "oneWL";
  std::string start;
  std::string weights;
  int column = 0;
  bool log = false;
  bool json = false;
  double level = 0.95;
  std::string probs;

  Control control;
  std::string raf = "ned";
  double raf_tau = 1.0;
  std::string grid = "-3:3:61";
};

void add_input_options(CLI::App* app, Options& o) {
  app->add_option("input", o.input, "Data file, one number per line ('-' for stdin)");
  app->add_option("--column", o.column, "1-based column of a comma-separated file (0: whole line)")
      ->check(CLI::NonNegativeNumber);
  app->add_flag("--log", o.log, "Take natural logs of the data");
}

void add_fit_options(CLI::App* app, Options& o) {
  add_input_options(app, o);
  app->add_option("--method", o.method, "Estimator")
      ->check(CLI::IsMember({"oneWL", "WQTau", "WL", "QTau", "ML"}));
  app->add_option("--start", o.start, "Starting value mu,sigma,lambda (default: QTau then WQTau)");
  app->add_option("--weights", o.weights, "Per-observation weights file (QTau and WQTau only)");
  app->add_flag("--json", o.json, "Machine-readable output");

  Control& c = o.control;
  app->add_option("--tuning-rho", c.tuning_rho, "M-scale tuning constant c1");
  app->add_option("--tuning-psi", c.tuning_psi, "Efficiency tuning constant c2");
  app->add_option("--bdp", c.bdp, "M-scale target b");
  app->add_option("--n-resample", c.n_resample, "Resampling candidates per lambda");
  app->add_option("--max-it", c.max_it, "Iteration limit");
  app->add_option("--refine-tol", c.refine_tol, "Relative convergence tolerance");
  app->add_option("--grid", o.grid, "Lambda grid lower:upper:n");
  app->add_option("--bw", c.bw, "Bandwidth factor (h = bw * sigma)");
  app->add_option("--subdivisions", c.subdivisions, "Quantiles in the smoothed model density");
  app->add_option("--raf", o.raf, "Residual adjustment function")
      ->check(CLI::IsMember({"ned", "gkl", "pwd", "hd", "schi2"}, CLI::ignore_case));
  app->add_option("--raf-tau", o.raf_tau, "tau of the GKL and PWD families");
  app->add_option("--minw", c.minw, "Weights below this are set to 0");
  app->add_option("--nexp", c.nexp, "Quantiles in the one-step J matrix");
  app->add_option("--step", c.step, "One-step multiplier");
  app->add_option("--seed", c.seed, "Resampling seed");
  app->add_option("--threads", c.threads, "Worker threads for the lambda grid");
}

Control build_control(const Options& o) {
  Control c = o.control;
  const auto family = parse_raf_family(o.raf);
  c.raf = {family, family == RafKind::Family::HD ? 2.0 : o.raf_tau};
  const auto parts = parse_list(o.grid, ':', "--grid");
  if (parts.size() != 3 || parts[2] != std::floor(parts[2])) throw UsageError("--grid expects lower:upper:n");
  c.lower = parts[0];
  c.upper = parts[1];
  c.grid_n = static_cast<int>(parts[2]);
  c.validate();
  return c;
}

std::optional<Theta> parse_start(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto v = parse_list(text, ',', "--start");
  if (v.size() != 3) throw UsageError("--start expects mu,sigma,lambda");
  try {
    return Theta(v[0], v[1], v[2]);
  } catch (const DomainError& e) {
    throw UsageError(std::string("--start: ") + e.what());
  }
}

std::vector<double> read_source(const std::string& path, std::istream& in, std::optional<int> column, bool log) {
  if (path == "-") return read_numbers(in, column, log);
  std::ifstream file(path);
  if (!file) throw InputError("cannot open '" + path + "'");
  try {
    return read_numbers(file, column, log);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd load_data(const Options& o, std::istream& in) {
  const auto column = o.column > 0 ? std::optional<int>(o.column) : std::nullopt;
  const auto values = read_source(o.input, in, column, o.log);
  if (values.size() < 5) throw InputError("at least 5 observations are required, got " + std::to_string(values.size()));
  return to_vector(values);
}

Eigen::VectorXd load_weights(const Options& o, std::istream& in, Eigen::Index n) {
  if (o.weights.empty()) return {};
  const auto w = read_source(o.weights, in, std::nullopt, false);
  if (static_cast<Eigen::Index>(w.size()) != n) throw InputError("--weights: expected one weight per observation");
  return to_vector(w);
}

FitResult run_fit(const Options& o, std::istream& in, const Control& control) {
  const Method method = parse_method(o.method);
  const Eigen::VectorXd y = load_data(o, in);
  const Eigen::VectorXd w = load_weights(o, in, y.size());
  return fit_method(y, method, parse_start(o.start), control, w);
}

std::vector<double> parse_probs(const std::string& text) {
  if (text.empty()) return {};
  return parse_list(text, ',', "--probs");
}

int cmd_fit(const Options& o, std::istream& in, std::ostream& out) {
  const Control control = build_control(o);
  const FitResult fit = run_fit(o, in, control);
  std::optional<FitSummary> summary;
  std::string summary_error;
  try {
    summary = summarize(fit, parse_probs(o.probs), o.level);
  } catch (const EstimationError& e) {
    summary_error = e.what();
  }
  if (o.json) {
    nlohmann::json j = to_json(fit);
    j["control"] = to_json(control);
    j["summary"] = summary ? to_json(*summary) : nlohmann::json(nullptr);
    if (!summary) j["summary_error"] = summary_error;
    out << j.dump(2) << "\n";
  } else {
    out << format_fit_text(fit, summary, summary_error);
  }
  return kOk;
}

struct TestOptions {
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<double> lambda;
  bool wilks = false;
  std::string wilks_weights = "unconstrained";
};

int cmd_test(const Options& o, const TestOptions& t, std::istream& in, std::ostream& out) {
  const NullSpec null{t.mu, t.sigma, t.lambda};
  if (t.wilks == (null.count() > 0)) throw UsageError("give either --wilks or at least one of --mu, --sigma, --lambda");
  const Control control = build_control(o);
  const FitResult fit = run_fit(o, in, control);
  TestResult result;
  if (t.wilks) {
    const auto which = t.wilks_weights == "constrained" ? WilksWeights::Constrained : WilksWeights::Unconstrained;
    result = weighted_wilks_test(fit.data, fit, control, which);
  } else {
    result = weighted_wald_test(fit, null, o.level);
  }
  if (o.json) {
    nlohmann::json j = to_json(result);
    j["schema"] = kJsonSchema;
    j["test"] = t.wilks ? "wilks" : "wald";
    j["fit"] = to_json(fit);
    out << j.dump(2) << "\n";
  } else {
    out << (t.wilks ? format_wilks_text(result, fit.method) : format_wald_text(result, fit.method));
  }
  return kOk;
}

int cmd_qq(const Options& o, std::istream& in, std::ostream& out) {
  const Control control = build_control(o);
  const FitResult fit = run_fit(o, in, control);
  const Eigen::Index n = fit.data.size();
  const Eigen::VectorXd p = plotting_positions(n);
  const FitSummary s = summarize(fit, std::vector<double>(p.begin(), p.end()), o.level);
  out << "theoretical_q,empirical_q,lower,upper,weight\n";
  char line[160];
  for (Eigen::Index j = 0; j < n; ++j) {
    const Interval& q = s.quantiles[static_cast<std::size_t>(j)].interval;
    std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.10g,%.10g\n", q.estimate, fit.data[j], q.lower, q.upper,
                  fit.weights[j]);
    out << line;
  }
  return kOk;
}

struct SimulateOptions {
  double mu = 0.0;
  double sigma = 1.0;
  double lambda = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = Control().seed;
  double eps = 0.0;
  double shift = 15.0;
  std::string output = "-";
};

int cmd_simulate(const SimulateOptions& s, std::ostream& out) {
  if (!(s.eps >= 0.0 && s.eps < 0.5)) throw UsageError("--eps must lie in [0, 0.5)");
  if (s.n < 1) throw UsageError("-n must be at least 1");
  if (!std::isfinite(s.shift)) throw UsageError("--shift must be finite");
  Theta theta(0.0, 1.0, 0.0);
  try {
    theta = Theta(s.mu, s.sigma, s.lambda);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  Eigen::VectorXd y = sample(s.n, theta, s.seed);
  const auto bad = static_cast<Eigen::Index>(std::floor(s.eps * static_cast<double>(s.n)));
  for (Eigen::Index j = 0; j < bad; ++j) y[j] += s.shift;

  std::ofstream file;
  std::ostream* os = &out;
  if (s.output != "-") {
    file.open(s.output);
    if (!file) throw UsageError("cannot write '" + s.output + "'");
    os = &file;
  }
  char line[128];
  std::snprintf(line, sizeof line, "# LG(mu=%.15g, sigma=%.15g, lambda=%.15g)\n", s.mu, s.sigma, s.lambda);
  *os << line;
  std::snprintf(line, sizeof line, " eps=%.15g shift=%.15g", s.eps, s.shift);
  *os << "# n=" << s.n << " seed=" << s.seed << line << " contaminated=" << bad << "\n";
  for (double v : y) {
    std::snprintf(line, sizeof line, "%.17g\n", v);
    *os << line;
  }
  return kOk;
}

}  // namespace

std::vector<double> read_numbers(std::istream& in, std::optional<int> column, bool log) {
  std::vector<double> values;
  std::string raw;
  int line_no = 0;
  bool seen_data = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    std::string field = line;
    if (column) {
      std::stringstream ss(line);
      std::string item;
      int k = 0;
      bool found = false;
      while (std::getline(ss, item, ',')) {
        if (++k == *column) {
          field = item;
          found = true;
          break;
        }
      }
      if (!found) throw InputError("line " + std::to_string(line_no) + ": no column " + std::to_string(*column));
    }
    double v = 0.0;
    if (!parse_double(field, v)) {
      if (column && !seen_data) {
        seen_data = true;  // header
        continue;
      }
      throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + trim(field) + "'");
    }
    seen_data = true;
    if (!std::isfinite(v)) throw InputError("line " + std::to_string(line_no) + ": value is not finite");
    if (log) {
      if (!(v > 0.0)) throw InputError("line " + std::to_string(line_no) + ": --log needs positive values");
      v = std::log(v);
    }
    values.push_back(v);
  }
  return values;
}

FitResult fit_method(const Eigen::VectorXd& y, Method method, const std::optional<Theta>& start,
                     const Control& control, const Eigen::VectorXd& weights) {
  if (weights.size() > 0 && method != Method::QTau && method != Method::WQTau) {
    throw UsageError("weights are accepted for the methods QTau and WQTau only");
  }
  // Weights follow the observations through sorting.
  Eigen::VectorXd sorted_y = y;
  Eigen::VectorXd sorted_w;
  if (weights.size() > 0) {
    if (weights.size() != y.size()) throw UsageError("weights must have one entry per observation");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return y[a] < y[b]; });
    sorted_w.resize(y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      sorted_y[k] = y[order[static_cast<std::size_t>(k)]];
      sorted_w[k] = weights[order[static_cast<std::size_t>(k)]];
    }
  }

  if (method == Method::QTau) return qtau_fit(sorted_y, control, sorted_w);

  FitResult first;
  if (start) {
    first.theta = *start;
  } else {
    first = qtau_fit(sorted_y, control, sorted_w);
  }
  if (method == Method::WQTau) return wqtau_fit(sorted_y, first, control);

  const Theta theta0 = start ? *start : wqtau_fit(sorted_y, first, control).theta;
  switch (method) {
    case Method::ML: return ml_fit(sorted_y, theta0, control);
    case Method::WL: return fiwl_fit(sorted_y, theta0, control);
    case Method::OneWL: return oneswl_fit(sorted_y, theta0, control);
    default: break;
  }
  throw UsageError("unknown method");
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust estimation for the generalized loggamma distribution", "loggammarob"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Options fit_opts;
  auto* fit = app.add_subcommand("fit", "Estimate (mu, sigma, lambda) with standard errors and intervals");
  add_fit_options(fit, fit_opts);
  fit->add_option("--level", fit_opts.level, "Confidence level");
  fit->add_option("--probs", fit_opts.probs, "Quantile orders for intervals, comma separated");

  Options test_opts;
  TestOptions test_null;
  auto* test = app.add_subcommand("test", "Weighted Wald test of fixed parameters, or weighted Wilks test of sigma = lambda");
  add_fit_options(test, test_opts);
  test->add_option("--level", test_opts.level, "Confidence level of the Wald interval");
  test->add_option("--mu", test_null.mu, "Null value of mu");
  test->add_option("--sigma", test_null.sigma, "Null value of sigma");
  test->add_option("--lambda", test_null.lambda, "Null value of lambda");
  test->add_flag("--wilks", test_null.wilks, "Wilks test of sigma = lambda");
  test->add_option("--wilks-weights", test_null.wilks_weights, "Weights of the Wilks statistic")
      ->check(CLI::IsMember({"unconstrained", "constrained"}));

  Options qq_opts;
  qq_opts.level = 0.90;
  auto* qq = app.add_subcommand("qq", "Q-Q plot data with pointwise bands (CSV)");
  add_fit_options(qq, qq_opts);
  qq->add_option("--level", qq_opts.level, "Band level");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a sample, optionally contaminated");
  simulate->add_option("--mu", sim.mu, "Location");
  simulate->add_option("--sigma", sim.sigma, "Scale");
  simulate->add_option("--lambda", sim.lambda, "Shape");
  simulate->add_option("-n", sim.n, "Sample size")->required();
  simulate->add_option("--seed", sim.seed, "Seed");
  simulate->add_option("--eps", sim.eps, "Fraction of draws shifted by --shift");
  simulate->add_option("--shift", sim.shift, "Shift of the contaminated draws");
  simulate->add_option("-o,--output", sim.output, "Output file ('-' for stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_opts, in, out);
    if (test->parsed()) return cmd_test(test_opts, test_null, in, out);
    if (qq->parsed()) return cmd_qq(qq_opts, in, out);
    if (simulate->parsed()) return cmd_simulate(sim, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const EstimationError& e) {
    err << "estimation failed: " << e.what() << "\n";
    return kEstimationFailure;
  } catch (const DomainError& e) {
    err << "estimation failed: " << e.what() << "\n";
    return kEstimationFailure;
  }
  return kUsageError;
}

}  // namespace rlg::cli
