#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tunescape {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (space specs, expressions). Line and column are 1-based; 0 means unknown.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

// Well-formed but semantically invalid space spec (duplicate names, unknown identifiers, type errors).
class SpecError : public Error {
 public:
  using Error::Error;
};

// Runtime failure while evaluating an expression (division by zero, overflow).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Tuning cache files that cannot be read, validated or written.
class CacheFormatError : public Error {
 public:
  using Error::Error;
  CacheFormatError(const std::string& message, std::size_t byte_offset);
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_ = 0;
};

class SchemaVersionError : public CacheFormatError {
 public:
  using CacheFormatError::CacheFormatError;
};

class ImportError : public Error {
 public:
  using Error::Error;
};

// Errors about the data being analysed rather than its encoding. The CLI maps these to exit code 1.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NoFeasibleData : public DomainError {
 public:
  explicit NoFeasibleData(const std::string& what);
};

class IncompleteCache : public DomainError {
 public:
  explicit IncompleteCache(std::size_t missing);
  std::size_t missing() const noexcept { return missing_; }

 private:
  std::size_t missing_;
};

class SpaceMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class MissingEntry : public DomainError {
 public:
  explicit MissingEntry(const std::string& key);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class UnknownDevice : public DomainError {
 public:
  explicit UnknownDevice(const std::string& device);
};

class NotConverged : public DomainError {
 public:
  NotConverged(std::size_t iterations, double residual);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace tunescape
