#pragma once

#include <stdexcept>
#include <string>

namespace polynl {

// Dimension mismatch or malformed shape on any operation input.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Request would exceed a configured size cap (dense order-8 tensors only
// exist at desk scale).
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation produced NaN/Inf where the contract requires finite values.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace polynl
