#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracspec {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A coefficient field breaks symmetry, ellipticity or nonnegativity.
class CoefficientError : public InvalidArgument {
 public:
  CoefficientError(const std::string& what, std::size_t node)
      : InvalidArgument(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// A scalar map is not finite somewhere on the spectrum.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, std::size_t index, double eigenvalue)
      : Error(what), index_(index), eigenvalue_(eigenvalue) {}
  std::size_t index() const noexcept { return index_; }
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  std::size_t index_;
  double eigenvalue_;
};

/// Non-convergence, blow-up or a failed numerical self-check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration that did not reach its tolerance.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : NumericalError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// Invalid run configuration. Carries the offending key and, when known, the line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key, int line = -1)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace fracspec
