#pragma once

#include <stdexcept>
#include <string>

namespace pheno {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (phenotype outside [0,1],
/// negative cell count, dose outside its bounds, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The integration produced a nonfinite state.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double t, double x);
  double time() const { return t_; }
  double phenotype() const { return x_; }

 private:
  double t_;
  double x_;
};

/// A state constraint cannot be satisfied from the supplied data.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration document; `what()` names the offending field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pheno
