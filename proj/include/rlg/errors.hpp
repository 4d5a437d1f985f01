#pragma once

#include <stdexcept>
#include <string>

namespace rlg {

/// Thrown when an argument lies outside the mathematical domain of an operation
/// (sigma <= 0, p outside (0,1), a divergent moment, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when an estimator cannot produce a usable estimate.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for malformed requests (bad options, empty null hypotheses, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rlg
