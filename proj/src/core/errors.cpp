// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/core/errors.hpp"

#include <sstream>

namespace promptseg {

std::string format_shape(const std::vector<int64_t>& shape) {
  std::ostringstream out;
  out << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

ShapeError ShapeError::mismatch(const std::string& what, const std::vector<int64_t>& expected,
                                const std::vector<int64_t>& actual) {
  return ShapeError(what + ": expected " + format_shape(expected) + ", got " +
                    format_shape(actual));
}

}  // namespace promptseg
