// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Validated value types for single samples. Each wraps a CPU tensor and checks
// its invariants on construction; batched code paths work on raw tensors with
// a leading batch dimension and use the same checks through the free helpers.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <torch/types.h>

namespace promptseg {

inline constexpr int64_t kImageChannels = 3;
inline constexpr int64_t kMinImageSide = 32;
inline constexpr int64_t kPromptChannels = 256;
inline constexpr int64_t kPromptSpatial = 64;
inline constexpr int64_t kDecoderNativeSide = 256;
inline constexpr double kDefaultThreshold = 0.5;

/// RGB raster, layout [3, H, W], floating point. Pixel values are expected in
/// [0, 1]; consumers apply their own normalization.
class Image {
 public:
  explicit Image(torch::Tensor pixels);

  const torch::Tensor& pixels() const { return pixels_; }
  int64_t height() const { return pixels_.size(1); }
  int64_t width() const { return pixels_.size(2); }

 private:
  torch::Tensor pixels_;
};

/// Binary raster [H, W] stored as uint8 with values in {0, 1}.
class Mask {
 public:
  explicit Mask(torch::Tensor pixels);

  /// Thresholds any real-valued [H, W] tensor: value > cutoff is foreground.
  static Mask from_values(const torch::Tensor& values, double cutoff);

  const torch::Tensor& pixels() const { return pixels_; }
  int64_t height() const { return pixels_.size(0); }
  int64_t width() const { return pixels_.size(1); }
  int64_t foreground_count() const;

 private:
  torch::Tensor pixels_;
};

/// Pre-sigmoid logits [H, W].
class LogitMap {
 public:
  explicit LogitMap(torch::Tensor values);

  const torch::Tensor& values() const { return values_; }
  torch::Tensor probabilities() const { return torch::sigmoid(values_); }
  int64_t height() const { return values_.size(0); }
  int64_t width() const { return values_.size(1); }

 private:
  torch::Tensor values_;
};

/// Dense prompt embedding [256, 64, 64] with values in [-1, 1].
class PromptEmbedding {
 public:
  explicit PromptEmbedding(torch::Tensor values);

  const torch::Tensor& values() const { return values_; }

 private:
  torch::Tensor values_;
};

/// Image embedding [C, H, W]; the shape is fixed by the segmenter backend.
class ImageEmbedding {
 public:
  explicit ImageEmbedding(torch::Tensor values);

  const torch::Tensor& values() const { return values_; }

 private:
  torch::Tensor values_;
};

struct SampleRecord {
  Image image;
  Mask mask;
  std::string dataset_id;
  std::optional<int64_t> frame_index;
  std::string source_path;

  /// Checks that image and mask share spatial dimensions.
  static SampleRecord make(Image image, Mask mask, std::string dataset_id,
                           std::string source_path,
                           std::optional<int64_t> frame_index = std::nullopt);
};

/// pixel = 1 iff sigmoid(logit) >= threshold; threshold must lie in (0, 1).
Mask binarize(const LogitMap& logits, double threshold = kDefaultThreshold);

/// Batched binarize on a tensor of any shape; returns uint8 of the same shape.
torch::Tensor binarize_logits(const torch::Tensor& logits, double threshold = kDefaultThreshold);

/// Throws NonFiniteError naming `what` when any element is NaN or Inf.
void require_finite(const torch::Tensor& t, const std::string& what);

/// Throws ShapeError when `images` is not [B, 3, H>=32, W>=32].
void require_image_batch(const torch::Tensor& images);

/// Throws ShapeError when `prompts` is not [B, 256, 64, 64].
void require_prompt_batch(const torch::Tensor& prompts);

}  // namespace promptseg
