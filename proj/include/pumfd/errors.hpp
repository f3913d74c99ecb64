#pragma once

#include <stdexcept>
#include <string>

namespace pumfd {

/// Bad user input or an unusable configuration (node-starved patch, wrong
/// kernel for the chosen path, non-unisolvent node set). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of a numerical step that was correctly requested. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix too ill-conditioned to factorize reliably.
class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double cond_estimate)
      : NumericalError(what), cond_estimate_(cond_estimate) {}
  double cond_estimate() const noexcept { return cond_estimate_; }

 private:
  double cond_estimate_;
};

/// Non-finite or exploding values during time stepping.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class UnisolvencyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace pumfd
