#pragma once

#include <stdexcept>
#include <string>

namespace tamed {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Caller misuse: mismatched grids, bad configuration fields, etc.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace tamed
