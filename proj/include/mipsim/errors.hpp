#pragma once

#include <stdexcept>
#include <string>

namespace mipsim {

/// Invalid parameters, mismatched fields, bad descriptors.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation applied outside its mathematical domain (division by zero,
/// arity mismatch, out-of-range index).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An exhaustive routine was asked to enumerate more than its guard allows.
class SizeGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A structural invariant that must hold by construction was found broken.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mipsim
