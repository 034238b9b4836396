#pragma once

#include <stdexcept>
#include <string>

namespace cascadia {

/// Malformed or inconsistent input data (bad JSON, unknown ids, missing
/// fields required by a variant).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An instance failed validation. The message lists every violation.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive routine refused to run because its estimated cost exceeds
/// the configured cap.
class ComputeCapExceeded : public std::runtime_error {
 public:
  ComputeCapExceeded(const std::string& what, double estimated_cost)
      : std::runtime_error(what), estimated_cost_(estimated_cost) {}

  double estimated_cost() const noexcept { return estimated_cost_; }

 private:
  double estimated_cost_;
};

}  // namespace cascadia
