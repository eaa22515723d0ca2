#pragma once

#include <stdexcept>
#include <string>

namespace springmag {

/// Invalid parameter or input shape. The message names the offending field.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(const std::string &field, const std::string &constraint)
      : std::invalid_argument(field + ": " + constraint), field_(field) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A caller broke a numerical precondition (e.g. passed a non-unit spin).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// In-plane angle requested for a vector with no in-plane component.
class AngleUndefined : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A search (critical angle, chirality flip) found nothing in its bracket.
class NotFound : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace springmag
