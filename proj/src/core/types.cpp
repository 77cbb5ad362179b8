// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/core/types.hpp"

#include <cmath>

#include <torch/torch.h>

#include "promptseg/core/errors.hpp"

namespace promptseg {

namespace {

std::vector<int64_t> dims(const torch::Tensor& t) { return t.sizes().vec(); }

}  // namespace

void require_finite(const torch::Tensor& t, const std::string& what) {
  if (!t.is_floating_point()) return;
  if (!torch::isfinite(t).all().item<bool>()) {
    throw NonFiniteError(what + " contains non-finite values");
  }
}

void require_image_batch(const torch::Tensor& images) {
  if (images.dim() != 4 || images.size(1) != kImageChannels ||
      images.size(2) < kMinImageSide || images.size(3) < kMinImageSide) {
    throw ShapeError("image batch: expected [B, 3, H>=32, W>=32], got " +
                     format_shape(dims(images)));
  }
}

void require_prompt_batch(const torch::Tensor& prompts) {
  if (prompts.dim() != 4 || prompts.size(1) != kPromptChannels ||
      prompts.size(2) != kPromptSpatial || prompts.size(3) != kPromptSpatial) {
    throw ShapeError::mismatch("prompt embedding batch",
                               {prompts.dim() > 0 ? prompts.size(0) : 1, kPromptChannels,
                                kPromptSpatial, kPromptSpatial},
                               dims(prompts));
  }
}

Image::Image(torch::Tensor pixels) : pixels_(std::move(pixels)) {
  if (!pixels_.defined() || pixels_.dim() != 3 || pixels_.size(0) != kImageChannels) {
    throw ShapeError("image: expected [3, H, W], got " +
                     (pixels_.defined() ? format_shape(dims(pixels_)) : std::string("undefined")));
  }
  if (pixels_.size(1) < kMinImageSide || pixels_.size(2) < kMinImageSide) {
    throw ShapeError("image: height and width must be >= 32, got " + format_shape(dims(pixels_)));
  }
  if (!pixels_.is_floating_point()) {
    throw std::invalid_argument("image: pixels must be floating point");
  }
  require_finite(pixels_, "image");
}

Mask::Mask(torch::Tensor pixels) : pixels_(std::move(pixels)) {
  if (!pixels_.defined() || pixels_.dim() != 2) {
    throw ShapeError("mask: expected [H, W], got " +
                     (pixels_.defined() ? format_shape(dims(pixels_)) : std::string("undefined")));
  }
  if (pixels_.scalar_type() != torch::kUInt8) {
    pixels_ = pixels_.to(torch::kUInt8);
  }
  if (pixels_.numel() > 0 && pixels_.max().item<int64_t>() > 1) {
    throw std::invalid_argument("mask: values must be 0 or 1");
  }
  pixels_ = pixels_.contiguous();
}

Mask Mask::from_values(const torch::Tensor& values, double cutoff) {
  return Mask(values.gt(cutoff).to(torch::kUInt8));
}

int64_t Mask::foreground_count() const { return pixels_.sum().item<int64_t>(); }

LogitMap::LogitMap(torch::Tensor values) : values_(std::move(values)) {
  if (!values_.defined() || values_.dim() != 2) {
    throw ShapeError("logit map: expected [H, W], got " +
                     (values_.defined() ? format_shape(dims(values_)) : std::string("undefined")));
  }
  if (!values_.is_floating_point()) {
    throw std::invalid_argument("logit map: values must be floating point");
  }
  require_finite(values_, "logit map");
}

PromptEmbedding::PromptEmbedding(torch::Tensor values) : values_(std::move(values)) {
  if (!values_.defined() || values_.dim() != 3 || values_.size(0) != kPromptChannels ||
      values_.size(1) != kPromptSpatial || values_.size(2) != kPromptSpatial) {
    throw ShapeError::mismatch("prompt embedding", {kPromptChannels, kPromptSpatial, kPromptSpatial},
                               values_.defined() ? dims(values_) : std::vector<int64_t>{});
  }
  require_finite(values_, "prompt embedding");
  if (values_.numel() > 0 && values_.abs().max().item<double>() > 1.0) {
    throw std::invalid_argument("prompt embedding: values must lie in [-1, 1]");
  }
}

ImageEmbedding::ImageEmbedding(torch::Tensor values) : values_(std::move(values)) {
  if (!values_.defined() || values_.dim() != 3) {
    throw ShapeError("image embedding: expected [C, H, W], got " +
                     (values_.defined() ? format_shape(dims(values_)) : std::string("undefined")));
  }
  require_finite(values_, "image embedding");
}

SampleRecord SampleRecord::make(Image image, Mask mask, std::string dataset_id,
                                std::string source_path, std::optional<int64_t> frame_index) {
  if (image.height() != mask.height() || image.width() != mask.width()) {
    throw ShapeError::mismatch("sample " + source_path + " mask", {image.height(), image.width()},
                               {mask.height(), mask.width()});
  }
  return SampleRecord{std::move(image), std::move(mask), std::move(dataset_id), frame_index,
                      std::move(source_path)};
}

torch::Tensor binarize_logits(const torch::Tensor& logits, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("binarize: threshold must lie in (0, 1)");
  }
  require_finite(logits, "logits");
  // Compare in double so the tie sigmoid(0) == 0.5 resolves to foreground.
  auto probs = torch::sigmoid(logits.to(torch::kFloat64));
  return probs.ge(threshold).to(torch::kUInt8);
}

Mask binarize(const LogitMap& logits, double threshold) {
  return Mask(binarize_logits(logits.values(), threshold));
}

}  // namespace promptseg
