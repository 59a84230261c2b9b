#pragma once

#include <stdexcept>
#include <string>

namespace droboost {

/// Input data could not be read or violates a Dataset invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge or left its domain.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed quantity would overflow (e.g. exp loss of a hugely negative margin).
class OutOfRangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

}  // namespace droboost
