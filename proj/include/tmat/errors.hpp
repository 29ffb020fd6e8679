#pragma once

#include <stdexcept>
#include <string>

namespace tmat {

/// Thrown when an algorithm fails numerically (SVD non-convergence,
/// imaginary residue above the truncation threshold, ...). Validation
/// problems use std::invalid_argument instead.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tmat
