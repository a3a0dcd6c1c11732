#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgpuq {

/// Invalid user input: parameters, configuration, or API preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Newton iteration hit max_iter without meeting the residual tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, double residual)
      : std::runtime_error("Newton did not converge after " + std::to_string(iterations) +
                           " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Load-increment bisection exhausted its depth budget.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by metrics and estimators on degenerate statistical input
/// (empty sample sets, zero mean, zero variance, empty ensembles).
class StatisticsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

#define SGPUQ_DERIVED_ERROR(Name, Base) \
  class Name : public Base {            \
   public:                              \
    using Base::Base;                   \
  };

SGPUQ_DERIVED_ERROR(EmptySamples, StatisticsError)
SGPUQ_DERIVED_ERROR(ZeroMean, StatisticsError)
SGPUQ_DERIVED_ERROR(ZeroVariance, StatisticsError)
SGPUQ_DERIVED_ERROR(EmptyEnsemble, StatisticsError)
SGPUQ_DERIVED_ERROR(CurveTooShort, ValidationError)
SGPUQ_DERIVED_ERROR(MissingSize, ValidationError)
SGPUQ_DERIVED_ERROR(OutOfRange, ValidationError)

#undef SGPUQ_DERIVED_ERROR

}  // namespace sgpuq
