#pragma once

#include <stdexcept>
#include <string>

namespace l0cert {

// Thrown when an input violates a documented precondition or a file does not
// match its format contract. The CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by exhaustive diagnostic paths when the instance exceeds their hard
// size caps. The CLI maps this to exit code 3.
class unsupported_size_error : public std::runtime_error {
 public:
  explicit unsupported_size_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace l0cert
