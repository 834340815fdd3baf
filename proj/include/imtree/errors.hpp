#pragma once

#include <stdexcept>
#include <string>

namespace imtree {

/// Malformed model, unknown identifier, or space mismatch.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical precondition does not hold (bracket violation, exhausted
/// enumeration budget, zero evidence probability in an oracle).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace imtree
