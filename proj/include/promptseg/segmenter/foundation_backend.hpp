// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Foundation segmenter loaded from three TorchScript modules in one directory
// (see tools/export_foundation.py):
//
//   image_encoder.pt   forward(x[1,3,1024,1024]) -> [1,256,64,64]
//   prompt_encoder.pt  embed_none(int batch)            -> (sparse[B,N,256], dense[B,256,64,64])
//                      embed_points(coords[B,N,2], labels[B,N]) -> (sparse, dense)
//                      embed_mask(mask[B,1,256,256])    -> (sparse, dense)
//                      dense_pe()                       -> [1,256,64,64]
//   mask_decoder.pt    forward(emb, pe, sparse, dense)  -> (low_res[B,1,256,256], iou[B,1])
//
// Preprocessing: longest side resized to the input resolution, pixels
// normalized with the model's 0-255 mean/std, zero padding at the bottom and
// right. Point coordinates are in the resized frame, (x, y) order.

#pragma once

#include <torch/script.h>

#include "promptseg/segmenter/backend.hpp"

namespace promptseg {

class FoundationBackend : public SegmenterBackend {
 public:
  explicit FoundationBackend(const BackendConfig& config);

  BackendKind kind() const override { return BackendKind::kFoundationVitHuge; }
  int64_t input_resolution() const override { return resolution_; }
  torch::Tensor encode_images(const torch::Tensor& images) override;
  void describe_frame(SegmenterOutput& out, int64_t height, int64_t width) const override;
  torch::Tensor decode_masks(const torch::Tensor& embeddings,
                             const torch::Tensor& prompts) override;
  torch::Tensor baseline_decode(const torch::Tensor& embeddings, BaselinePrompt kind,
                                const Mask& annotation, int64_t image_height,
                                int64_t image_width) override;
  ParameterSnapshot snapshot() const override;

  /// Resize-longest-side, normalize and pad one [3, H, W] image in [0, 1].
  torch::Tensor preprocess(const torch::Tensor& image) const;

 private:
  std::pair<int64_t, int64_t> scaled_size(int64_t height, int64_t width) const;
  torch::Tensor run_decoder(const torch::Tensor& embedding, const torch::Tensor& sparse,
                            const torch::Tensor& dense);

  int64_t resolution_;
  double mask_prompt_logit_;
  torch::jit::Module image_encoder_;
  torch::jit::Module prompt_encoder_;
  torch::jit::Module mask_decoder_;
};

}  // namespace promptseg
