// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain row-major rasters used by the metric code, which has no tensor
// dependency.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace promptseg {

template <typename T>
struct Raster {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<T> data;

  Raster() = default;
  Raster(int64_t h, int64_t w, T fill = T{}) : height(h), width(w), data(h * w, fill) {}
  Raster(int64_t h, int64_t w, std::vector<T> values) : height(h), width(w), data(std::move(values)) {
    if (static_cast<int64_t>(data.size()) != h * w) {
      throw std::invalid_argument("Raster: data size does not match dimensions");
    }
  }

  T& at(int64_t r, int64_t c) { return data[r * width + c]; }
  const T& at(int64_t r, int64_t c) const { return data[r * width + c]; }
  int64_t size() const { return height * width; }
};

using BinaryMap = Raster<uint8_t>;  // values in {0, 1}
using ProbMap = Raster<double>;     // values in [0, 1]

template <typename A, typename B>
void require_same_dims(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (a.height != b.height || a.width != b.width) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.height) + "x" + std::to_string(a.width) +
                                " vs " + std::to_string(b.height) + "x" +
                                std::to_string(b.width) + ")");
  }
}

/// p >= threshold -> 1.
BinaryMap threshold_map(const ProbMap& prob, double threshold);

ProbMap to_prob(const BinaryMap& mask);

}  // namespace promptseg
