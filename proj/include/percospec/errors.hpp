#pragma once

#include <stdexcept>
#include <string>

namespace percospec {

/// A precondition on the inputs was violated (bad radius, subset not contained, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured size cap (vertex budget, dense cap) would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical oracle disagreed with the computed object.
class OracleViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The spectrum has no usable part (all kernel, empty fit range, zero vector).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace percospec
