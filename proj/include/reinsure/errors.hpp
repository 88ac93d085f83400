#ifndef REINSURE_ERRORS_HPP
#define REINSURE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace reinsure {

/// Argument outside the mathematical domain of an operation (negative loss,
/// probability outside (0,1), attachment above detachment, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameters that do not describe an admissible object (non-concave
/// distortion, kernel slope above one, unsorted empirical table, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The loss distribution has no finite mean (Pareto shape <= 1).
class InfiniteMeanError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Conditioning on an event of probability zero.
class DegenerateTailError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A schedule with fractional slopes was passed where a 0/1 slope pattern is
/// required.
class NotBangBangError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Retained risk is zero or negative, so the profit/risk ratio is undefined.
class NonpositiveRiskError : public std::runtime_error {
 public:
  explicit NonpositiveRiskError(const std::string& what, double risk = 0.0)
      : std::runtime_error(what), risk_(risk) {}
  double risk() const noexcept { return risk_; }

 private:
  double risk_;
};

/// Numerical routine failed to meet its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reinsure

#endif  // REINSURE_ERRORS_HPP
