// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Raster file IO. Images decode to RGB float in [0, 1]; masks decode from a
// single channel (or the first channel of a color file) and are binarized.
// Resizing is bilinear for images and nearest-neighbor for masks.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "promptseg/core/types.hpp"

namespace promptseg {

using Size2 = std::pair<int64_t, int64_t>;  // (height, width)

enum class MaskRule {
  kNonZero,   // instance-label maps: any nonzero label is foreground
  kAbove127,  // 8-bit binary masks with anti-aliasing or JPEG noise
};

Image load_image(const std::string& path, std::optional<Size2> resize = std::nullopt);
Mask load_mask(const std::string& path, MaskRule rule,
               std::optional<Size2> resize = std::nullopt);

Image resize_image(const Image& image, Size2 size);
Mask resize_mask(const Mask& mask, Size2 size);

/// Writes 0/255 single-channel PNG.
void save_mask_png(const std::string& path, const Mask& mask);
/// Writes an [H, W] probability map in [0, 1] as 8-bit PNG.
void save_probability_png(const std::string& path, const torch::Tensor& probabilities);
/// Writes [3, H, W] in [0, 1] as 8-bit PNG (for fixtures and debugging).
void save_image_png(const std::string& path, const Image& image);

/// Reads only the header-level size of an image file.
Size2 image_size(const std::string& path);

}  // namespace promptseg
