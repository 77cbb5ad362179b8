// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact Euclidean distance from every pixel to the nearest foreground pixel,
// with the index of that pixel. Among equidistant candidates the one with the
// smallest column, then the smallest row, wins (column-major first index).

#pragma once

#include <cstdint>
#include <vector>

#include "promptseg/metrics/raster.hpp"

namespace promptseg {

struct DistanceField {
  std::vector<double> distance;  // row-major; +inf when there is no foreground
  std::vector<int64_t> nearest;  // row-major index of the nearest foreground pixel, -1 if none
};

DistanceField distance_to_foreground(const BinaryMap& foreground);

}  // namespace promptseg
