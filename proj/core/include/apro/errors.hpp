#pragma once

#include <stdexcept>
#include <string>

namespace apro {

/// Raised when inputs violate a shape, range or parameter contract.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a file cannot be opened, read, or does not match its format.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace apro
