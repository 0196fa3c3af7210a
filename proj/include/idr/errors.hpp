#pragma once

#include <stdexcept>
#include <string>

namespace idr {

// Malformed input, failed cross-reference, schema violation. CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric routine cannot produce a valid result (rank deficiency,
// non-convergence, separation). CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace idr
