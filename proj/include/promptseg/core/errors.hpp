// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared by every module.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace promptseg {

/// Tensor or raster dimensions disagree with a contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;

  /// Builds "<what>: expected [a, b, c], got [d, e]".
  static ShapeError mismatch(const std::string& what, const std::vector<int64_t>& expected,
                             const std::vector<int64_t>& actual);
};

/// NaN or Inf where finite values are required.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A parameter set that must stay frozen was modified.
class FrozenInvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The backend does not implement the requested operation.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Weights or checkpoints that were explicitly requested cannot be found or read.
class MissingWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_shape(const std::vector<int64_t>& shape);

}  // namespace promptseg
