#pragma once

#include <stdexcept>
#include <string>

namespace spoc {

// Error taxonomy mirrors the CLI exit codes: usage 2, data 3, numerical 4.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or dimension mismatches caught before any computation.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent external data (files, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Solver non-convergence, singular systems, rank deficiency.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace spoc
