// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small fixed-seed stand-in for the foundation segmenter with the same
// interface shapes: a patchifying conv encoder to [256, 64, 64] and a 1x1 conv
// decoder to [1, 256, 256]. Prompt weights are nonnegative, so the logits are
// strictly increasing in every prompt element.

#pragma once

#include <torch/nn/module.h>
#include <torch/nn/modules/conv.h>

#include "promptseg/segmenter/backend.hpp"

namespace promptseg {

class StubNetImpl : public torch::nn::Module {
 public:
  StubNetImpl(int64_t input_resolution, uint64_t seed);

  torch::nn::Conv2d patch{nullptr};
  torch::nn::Conv2d embed{nullptr};
  torch::nn::Conv2d from_image{nullptr};
  torch::nn::Conv2d from_prompt{nullptr};
  torch::nn::Conv2d head{nullptr};
};
TORCH_MODULE(StubNet);

class StubBackend : public SegmenterBackend {
 public:
  explicit StubBackend(const BackendConfig& config);

  BackendKind kind() const override { return BackendKind::kFrozenStub; }
  int64_t input_resolution() const override { return resolution_; }
  torch::Tensor encode_images(const torch::Tensor& images) override;
  torch::Tensor decode_masks(const torch::Tensor& embeddings,
                             const torch::Tensor& prompts) override;
  ParameterSnapshot snapshot() const override;

  /// Exposed for tests that probe gradient routing.
  StubNet& net() { return net_; }

 private:
  int64_t resolution_;
  StubNet net_{nullptr};
};

}  // namespace promptseg
