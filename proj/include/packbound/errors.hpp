#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace packbound {

/// Bad arguments or violated preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Grid spacing too large for the domain (no interior nodes, or h >= diameter / 8).
class ResolutionTooCoarse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query outside the resolved part of a spectrum.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The eigensolver exhausted its iteration budget. Carries the best residuals reached.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> best_residuals)
      : std::runtime_error(what), residuals_(std::move(best_residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace packbound
