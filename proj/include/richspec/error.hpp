#pragma once

#include <stdexcept>
#include <string>

namespace richspec {

/// Failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Config = 1,      ///< usage or configuration problem
  Validation = 2,  ///< malformed or inconsistent input data
  Numerical = 3,   ///< factorization failure, degenerate statistics
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace richspec
