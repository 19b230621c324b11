#pragma once

#include <stdexcept>
#include <string>

namespace fbench {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input shape or configuration; the CLI maps these to exit status 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IntegrityError : public ValidationError {
 public:
  IntegrityError(const std::string& what, std::size_t row)
      : ValidationError(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Argument outside the domain where an operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ExtrapolationError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A curve does not cover the range an operation needs.
class SpanError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public InsufficientDataError {
 public:
  using InsufficientDataError::InsufficientDataError;
};

class FeatureError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace fbench
