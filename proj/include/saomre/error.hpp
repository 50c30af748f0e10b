#pragma once

#include <stdexcept>
#include <string>

namespace saomre {

// Process exit codes used by the CLI.
enum class ExitCode : int {
  Success = 0,
  Failure = 1,
  Validation = 2,
  Divergence = 3,
  Degeneracy = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, std::string kind, const std::string& what)
      : std::runtime_error(what), code_(code), kind_(std::move(kind)) {}

  ExitCode code() const { return code_; }
  const std::string& kind() const { return kind_; }

 private:
  ExitCode code_;
  std::string kind_;
};

/// Bad input: malformed files, inconsistent dimensions, invalid model declarations.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ExitCode::Validation, "validation", what) {}
};

/// Estimation chain left the finite / bounded region.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what)
      : Error(ExitCode::Divergence, "divergence", what) {}
};

/// Derivative or covariance matrix too ill-conditioned to invert.
class CollinearityError : public Error {
 public:
  explicit CollinearityError(const std::string& what)
      : Error(ExitCode::Divergence, "collinearity", what) {}
};

/// Simulation exploded (ministep cap exceeded, non-finite utilities).
class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& what)
      : Error(ExitCode::Degeneracy, "degeneracy", what) {}
};

}  // namespace saomre
