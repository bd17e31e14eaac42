#pragma once

#include <stdexcept>
#include <string>

namespace ringsync {

/// Rejected input: a value outside its domain or an inconsistent config.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation invariant was broken. Indicates a bug, not bad input.
class ProtocolFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ringsync
