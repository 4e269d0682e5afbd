#pragma once

#include <stdexcept>
#include <string>

namespace cpsc {

// Bad parameters surface as std::invalid_argument, bad indices as
// std::out_of_range. The two types below cover input data and numerics.

/// Input data could not be read or does not satisfy the dataset invariants.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed (e.g. the eigensolver did not converge).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpsc
