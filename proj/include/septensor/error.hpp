#pragma once

#include <stdexcept>
#include <string>

namespace septensor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A coordinate fell outside the box domain of a dimension.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

/// Inconsistent hyperparameters, dimension tags or constraint sets.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Patch moment system too ill-conditioned to trust.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, std::size_t element)
      : Error(what + " (element " + std::to_string(element) + ")"), element_(element) {}
  std::size_t element() const noexcept { return element_; }

 private:
  std::size_t element_;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

}  // namespace septensor
