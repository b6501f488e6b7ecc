#pragma once

#include <stdexcept>
#include <string>

namespace oedpm {

// Misuse of an API contract: bad dimensions, empty input, out-of-range
// arguments. These indicate caller bugs, not recoverable runtime states.
class UsageError : public std::invalid_argument {
public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Invalid run configuration (CLI flags, ensemble settings).
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Problems with input data: missing files, parse failures, label issues.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: Cholesky breakdown, non-finite intermediate values.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace oedpm
