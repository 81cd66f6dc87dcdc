#pragma once

#include <stdexcept>
#include <string>

namespace subdim {

/// Base class of every library error.
///
/// Each error carries the process exit code the CLI maps it to:
///   1 = usage / configuration error,
///   2 = data error (parse failure, degenerate or insufficient data),
///   3 = internal numerical failure.
class Error : public std::runtime_error {
 public:
  Error(const std::string& message, int exitCode)
      : std::runtime_error(message), exitCode_(exitCode) {}

  [[nodiscard]] int exit_code() const noexcept { return exitCode_; }

 private:
  int exitCode_;
};

/// A dimension argument (p, q, q0, k, ...) is out of its valid range.
class InvalidDimensionError : public Error {
 public:
  explicit InvalidDimensionError(const std::string& m) : Error(m, 1) {}
};

/// A coordinate subset is malformed or incompatible with the data dimension.
class InvalidSubsetError : public Error {
 public:
  explicit InvalidSubsetError(const std::string& m) : Error(m, 1) {}
};

/// A family or test parameter is invalid (e.g. moments do not exist).
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& m) : Error(m, 1) {}
};

/// CLI flag / config-file validation failure.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(m, 1) {}
};

/// The data are numerically degenerate (singular covariance, zero variance,
/// non-finite entries, ...).
class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& m) : Error(m, 2) {}
};

/// Too few observations for the requested computation.
class InsufficientSampleError : public Error {
 public:
  explicit InsufficientSampleError(const std::string& m) : Error(m, 2) {}
};

/// CSV ingestion failure; carries a 1-based line number when known.
class CsvParseError : public Error {
 public:
  explicit CsvParseError(const std::string& m, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + m : m, 2),
        line_(line) {}

  [[nodiscard]] long line() const noexcept { return line_; }

 private:
  long line_;
};

/// An estimated null model is unusable (e.g. dispersion matrix has a
/// significantly negative eigenvalue).
class ModelInvalidError : public Error {
 public:
  explicit ModelInvalidError(const std::string& m) : Error(m, 3) {}
};

/// An internal consistency contract failed; indicates a bug or severe
/// numerical breakdown, not a user error.
class ContractViolationError : public Error {
 public:
  explicit ContractViolationError(const std::string& m) : Error(m, 3) {}
};

}  // namespace subdim
