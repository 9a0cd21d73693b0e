#pragma once

#include <stdexcept>
#include <string>

namespace equicalib {

// Precondition or argument violation (bad descriptor, out-of-range parameter).
// The CLI maps this to exit code 2.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (file schema, unnormalized weights,
// shape mismatch between records). Exit code 3.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular systems, variance underflow, training divergence,
// quadrature non-convergence. Exit code 4.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace equicalib
