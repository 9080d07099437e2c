#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

class HarvestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant (negative rate, asymmetric matrix, ...).
class ValidationError : public HarvestError {
 public:
  using HarvestError::HarvestError;
};

/// A per-crop or per-entity dimension is missing or has the wrong length.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed integer program (unbounded expression in a big-M form, bad index, ...).
class ModelError : public HarvestError {
 public:
  using HarvestError::HarvestError;
};

/// A plan's tours and assignment disagree.
class IntegrityError : public HarvestError {
 public:
  using HarvestError::HarvestError;
};

}  // namespace harvest
