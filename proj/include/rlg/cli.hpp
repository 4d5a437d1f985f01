#pragma once

// The loggammarob command line: fit, test, qq and simulate.

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlg/control.hpp"
#include "rlg/fit_result.hpp"
#include "rlg/theta.hpp"

namespace rlg::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kEstimationFailure = 3, kUsageError = 4 };

/// Unparseable or invalid input data; the message carries the line number.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One number per line; blank lines and '#' comments are skipped. With
/// `column` (1-based) each line is split on commas and that field is used; a
/// non-numeric first data line is then taken as a header. `log` applies the
/// natural log and rejects non-positive values.
std::vector<double> read_numbers(std::istream& in, std::optional<int> column = std::nullopt, bool log = false);

/// Runs `method` with the default chaining: without `start`, QTau and then
/// WQTau supply the starting value. `weights` (input order) are accepted for
/// QTau and WQTau only.
FitResult fit_method(const Eigen::VectorXd& y, Method method, const std::optional<Theta>& start,
                     const Control& control, const Eigen::VectorXd& weights = Eigen::VectorXd());

/// Full command line without the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace rlg::cli
