#pragma once

#include <stdexcept>
#include <string>

namespace sdecmp {

// Invalid experiment setup: bad parameters, malformed tables, off-grid times.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid data handed to an algorithm (e.g. conflicting samples).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested storage cannot be represented or allocated.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation is not available for this drift or dimension.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Importance weights too degenerate to support an estimate.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sdecmp
