#pragma once

#include <stdexcept>
#include <string>

namespace bidomain {

/// Invalid parameters, mesh specs or config documents.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Base for linear-solver failures.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

class NonConvergenceError : public SolverError {
 public:
  NonConvergenceError(const std::string& what, double last_residual)
      : SolverError(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Non-finite values or a non-positive curvature direction inside a solver.
class NumericBreakdownError : public SolverError {
 public:
  explicit NumericBreakdownError(const std::string& what) : SolverError(what) {}
};

class SingularMatrixError : public SolverError {
 public:
  explicit SingularMatrixError(const std::string& what) : SolverError(what) {}
};

}  // namespace bidomain

namespace bidomain {

/// File could not be opened or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bidomain
