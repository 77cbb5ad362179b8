// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// The frozen promptable segmenter. A backend owns an image encoder and a mask
// decoder whose dense-prompt slot is fed by the prompt generator. Backend
// parameters never require gradients; gradients flow through the decoder to
// the prompt only.

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>
#include <torch/types.h>

#include "promptseg/core/parameter_snapshot.hpp"
#include "promptseg/core/types.hpp"

namespace promptseg {

class PromptGeneratorImpl;

enum class BackendKind { kFoundationVitHuge, kFrozenStub };

std::string to_string(BackendKind k);
BackendKind backend_kind_from_string(const std::string& s);

struct BackendConfig {
  BackendKind kind = BackendKind::kFrozenStub;
  int64_t input_resolution = 256;  // 1024 for the foundation backend
  std::string weights_path;        // directory holding the exported modules
  uint64_t seed = 1234;            // stub weights
  double mask_prompt_logit = 8.0;  // magnitude of the GT-mask baseline prompt

  static BackendConfig stub(int64_t input_resolution = 256, uint64_t seed = 1234);
  static BackendConfig foundation(std::string weights_path);

  void validate() const;
  nlohmann::json to_json() const;
  static BackendConfig from_json(const nlohmann::json& j);
};

/// Decoder output: logits at the decoder-native 256x256 grid plus the
/// geometry needed to map them back onto the input image.
struct SegmenterOutput {
  torch::Tensor logits;  // [B, 1, 256, 256]
  /// Padded input frame the logits cover, and the part of it holding image
  /// content. Backends that stretch instead of pad leave valid == frame.
  int64_t frame_side = kDecoderNativeSide;
  int64_t valid_height = kDecoderNativeSide;
  int64_t valid_width = kDecoderNativeSide;

  /// Upsamples to the frame, crops the valid region and resizes it to
  /// [B, 1, height, width], all bilinear. Differentiable.
  torch::Tensor at_resolution(int64_t height, int64_t width) const;

  /// Native logits of one sample as a LogitMap.
  LogitMap native(int64_t index = 0) const;
};

enum class BaselinePrompt { kPoint, kGtMask };

class SegmenterBackend {
 public:
  virtual ~SegmenterBackend() = default;

  virtual BackendKind kind() const = 0;
  virtual int64_t input_resolution() const = 0;

  /// images: [B, 3, H, W] in [0, 1]. Returns the image embedding batch; never
  /// records gradients.
  virtual torch::Tensor encode_images(const torch::Tensor& images) = 0;

  /// Fills frame_side / valid_height / valid_width for an H x W input.
  virtual void describe_frame(SegmenterOutput& out, int64_t height, int64_t width) const;

  /// embeddings from encode_images, prompts [B, 256, 64, 64]. Returns logits
  /// [B, 1, 256, 256], differentiable with respect to prompts.
  virtual torch::Tensor decode_masks(const torch::Tensor& embeddings,
                                     const torch::Tensor& prompts) = 0;

  /// Runs the backend's own prompt encoder on a GT-derived prompt. Throws
  /// UnsupportedOperation for backends without one.
  virtual torch::Tensor baseline_decode(const torch::Tensor& embeddings, BaselinePrompt kind,
                                        const Mask& annotation, int64_t image_height,
                                        int64_t image_width);

  /// Digest over every parameter and buffer of the backend.
  virtual ParameterSnapshot snapshot() const = 0;
};

std::unique_ptr<SegmenterBackend> make_backend(const BackendConfig& config);

ImageEmbedding encode_image(SegmenterBackend& backend, const Image& image);

SegmenterOutput decode_mask(SegmenterBackend& backend, const ImageEmbedding& image_emb,
                            const PromptEmbedding& prompt);

/// decode_mask(encode_image(I), g(I)) for a batch [B, 3, H, W].
SegmenterOutput forward_batch(SegmenterBackend& backend, PromptGeneratorImpl& g,
                              const torch::Tensor& images);

SegmenterOutput forward(SegmenterBackend& backend, PromptGeneratorImpl& g, const Image& image);

/// Evaluation-only pass through the backend's original prompt encoder, with a
/// point (the foreground pixel farthest from the background) or the GT mask
/// itself as the prompt.
SegmenterOutput baseline_prompt_forward(SegmenterBackend& backend, BaselinePrompt kind,
                                        const Image& image, const Mask& annotation);

/// Foreground pixel with the largest distance to the background, as (row,
/// col). Throws std::invalid_argument for an empty mask.
std::pair<int64_t, int64_t> interior_point(const Mask& mask);

}  // namespace promptseg
