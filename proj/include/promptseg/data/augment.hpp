// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training-time augmentation. A recipe holds parameter ranges; a draw holds
// one concrete parameter set expressed as offsets from the identity, so a
// zero draw leaves the sample unchanged. Geometric transforms act on image
// and mask together (bilinear / nearest, zero fill); photometric ones on the
// image only, with torchvision ColorJitter semantics.

#pragma once

#include <array>
#include <random>
#include <string>

#include "promptseg/core/types.hpp"

namespace promptseg {

struct AugmentDraw {
  bool hflip = false;
  double rotation_deg = 0.0;
  double scale_offset = 0.0;  // scale = 1 + offset
  double translate_x = 0.0;   // fraction of width
  double translate_y = 0.0;   // fraction of height
  double brightness = 0.0;    // factor = 1 + offset
  double contrast = 0.0;
  double saturation = 0.0;
  double hue = 0.0;           // shift in turns, [-0.5, 0.5]
  std::array<int, 4> jitter_order{0, 1, 2, 3};  // brightness, contrast, saturation, hue

  bool is_identity() const;
};

struct AugmentationRecipe {
  std::string name = "identity";
  double hflip_probability = 0.0;
  double max_rotation_deg = 0.0;
  double max_scale_offset = 0.0;
  double max_translate = 0.0;
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;
  double hue = 0.0;

  bool is_identity() const;
  AugmentDraw sample(std::mt19937_64& rng) const;
  SampleRecord apply(const SampleRecord& sample, const AugmentDraw& draw) const;
  SampleRecord apply(const SampleRecord& sample, std::mt19937_64& rng) const {
    return apply(sample, this->sample(rng));
  }
};

/// "glas": jitter (0.2, 0.2, 0.2, 0.1), hflip 0.5, translate 5%, scale 1 +- 0.2.
/// "monuseg": rotation +-20 deg, scale [0.75, 1.25], hflip 0.5, jitter (0.4, 0.4, 0.4, 0.1).
/// "none" / "identity" and polyp datasets: identity. Unknown names: identity
/// with a logged warning.
AugmentationRecipe make_augmenter(const std::string& dataset);

/// Photometric helpers on [3, H, W] RGB in [0, 1].
torch::Tensor adjust_brightness(const torch::Tensor& rgb, double factor);
torch::Tensor adjust_contrast(const torch::Tensor& rgb, double factor);
torch::Tensor adjust_saturation(const torch::Tensor& rgb, double factor);
torch::Tensor adjust_hue(const torch::Tensor& rgb, double shift);

}  // namespace promptseg
