#pragma once

#include <stdexcept>
#include <string>

namespace zerolm {

/// Base class of every error raised by the library. The CLI maps the
/// concrete subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A configuration, architecture or file does not satisfy its schema.
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string &message);
  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed input line in a line-delimited file.
class ParseError : public ValidationError {
public:
  ParseError(std::string path, std::size_t line, const std::string &message);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Statistic or formula undefined for the given input (all-tied vectors,
/// zero denominators, zero-norm matrices).
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

/// Numerical routine failed (e.g. SVD did not converge).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Exact integer result does not fit the fixed-width representation.
class OverflowError : public Error {
public:
  using Error::Error;
};

/// The requested operation is not defined for this kind of search space.
class UnsupportedSpaceError : public Error {
public:
  using Error::Error;
};

/// Search or optimization could not be set up or produced no result.
class SetupError : public Error {
public:
  using Error::Error;
};

} // namespace zerolm
