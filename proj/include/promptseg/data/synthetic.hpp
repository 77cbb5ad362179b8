// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic data: one to three soft-edged ellipses over a noisy
// background; the mask is the union of the ellipse interiors.

#pragma once

#include <cstdint>
#include <vector>

#include "promptseg/core/types.hpp"

namespace promptseg {

struct SyntheticBlobsConfig {
  int64_t count = 4;
  int64_t size = 64;
  uint64_t seed = 7;
  double noise_std = 0.05;
};

/// Sample i depends only on (seed, i, size, noise_std).
SampleRecord synthetic_blob(const SyntheticBlobsConfig& config, int64_t index);
std::vector<SampleRecord> synthetic_blobs(const SyntheticBlobsConfig& config);

}  // namespace promptseg
