#pragma once

#include <stdexcept>
#include <string>

namespace solab {

/// Precondition or input-validation failure. Carries an optional field path
/// (used by manifest validation).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A construction that cannot be completed (non-covering bump, tail bound
/// too large, retry budget exhausted, ...).
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry is not transverse at the configured threshold.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace solab
