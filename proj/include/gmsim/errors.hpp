#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gmsim {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or invalid parameters handed to a model, solver or scenario.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// The adaptive controller asked for a step below `min_step`.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A state component became NaN or infinite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Signal evaluated outside [0, duration].
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Unknown preset name.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Analysis errors.
class UnsupportedTraceError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class IncompatibleTraceError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class UnknownColumnError : public Error {
 public:
  using Error::Error;
};

// Scenario file errors. Each carries the dotted path of the offending field
// (empty for syntax errors, which carry a line/column instead).
class ScenarioError : public ConfigurationError {
 public:
  ScenarioError(const std::string& what, std::string field)
      : ConfigurationError(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class SyntaxError : public ScenarioError {
 public:
  SyntaxError(const std::string& what, int line, int column)
      : ScenarioError(what, ""), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class UnknownKeyError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

class InvariantViolation : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

class LengthMismatchError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

/// Malformed trace CSV or header mismatch.
class TraceFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gmsim
