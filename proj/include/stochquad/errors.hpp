#pragma once

#include <stdexcept>
#include <string>

namespace stochquad {

/// Thrown when a sampler exhausts its retry budget (e.g. a rejection loop).
class ResourceExhaustedError : public std::runtime_error {
 public:
  explicit ResourceExhaustedError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a non-finite value appears where finite arithmetic is required.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stochquad
