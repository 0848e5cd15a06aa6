#pragma once

#include <stdexcept>
#include <string>

namespace pmn {

/// Target coincides with a node or the base station, so angle/range
/// derivatives are undefined.
class SingularGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that must be symmetric positive-definite failed its Cholesky
/// factorization.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration would exceed the configured subset cap.
class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmn
