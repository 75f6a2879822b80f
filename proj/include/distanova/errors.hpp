#pragma once

#include <stdexcept>
#include <string>

namespace distanova {

// Invalid shapes, labels, matrix properties, out-of-range options.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Unreadable or malformed input files.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerically degenerate configuration: zero within-group variability,
// point-mass permutation distribution, singular metric, pole evaluation.
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace distanova
