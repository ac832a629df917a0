#pragma once

#include <stdexcept>
#include <string>

namespace sobscale {

// Domain and argument violations use std::domain_error / std::invalid_argument.

/// A Gram matrix or matrix pencil too ill-conditioned to factor reliably.
class ConditioningError : public std::runtime_error {
 public:
  explicit ConditioningError(const std::string& what) : std::runtime_error(what) {}
};

/// A cover whose balls leave a grid point uncovered.
class CoverGapError : public std::runtime_error {
 public:
  explicit CoverGapError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sobscale
