#pragma once

#include <stdexcept>
#include <string>

namespace audit {

// Base class for every error raised by this library.
class AuditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad wiring: missing fixtures, malformed plans, unusable options.
// The CLI maps these to exit code 2.
class ConfigError : public AuditError {
 public:
  using AuditError::AuditError;
};

// Bad data encountered while running: broken records, impossible requests.
// The CLI maps these (and subclasses) to exit code 3.
class DataError : public AuditError {
 public:
  using AuditError::AuditError;
};

// A value outside its documented domain (stance not in {-1,0,1}, alpha
// outside (0,1), ranks not 1..n, ...).
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

// Lookup of an id that does not exist in the referenced collection.
class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

// A score was requested for a page with no scoreable content (empty result
// list, empty component list, or an empty component).
class UndefinedScoreError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace audit
