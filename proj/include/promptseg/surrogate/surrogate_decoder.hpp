// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shallow decoder h that reads a prompt embedding straight into a mask:
// deconv(256 -> 64, k4 s2 p1) -> ReLU -> deconv(64 -> 1, k4 s2 p1), taking the
// 64x64 grid to 256x256 logits.

#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>
#include <torch/nn/module.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/pimpl.h>

#include "promptseg/core/types.hpp"

namespace promptseg {

struct SurrogateConfig {
  int64_t hidden_channels = 64;
  uint64_t seed = 0;

  nlohmann::json to_json() const;
  static SurrogateConfig from_json(const nlohmann::json& j);
};

class SurrogateDecoderImpl : public torch::nn::Module {
 public:
  explicit SurrogateDecoderImpl(SurrogateConfig config = {});

  /// prompts [B, 256, 64, 64] -> logits [B, 1, 256, 256].
  torch::Tensor forward(const torch::Tensor& prompts);

  const SurrogateConfig& config() const { return config_; }
  int64_t parameter_count() const;

  /// Sets every weight and bias to zero.
  void zero_parameters();

  torch::nn::ConvTranspose2d up1{nullptr};
  torch::nn::ConvTranspose2d up2{nullptr};

 private:
  SurrogateConfig config_;
};
TORCH_MODULE(SurrogateDecoder);

/// Builds h with seeded fan-in normal init.
SurrogateDecoder build_surrogate_decoder(const SurrogateConfig& config = {});

LogitMap surrogate_forward(SurrogateDecoderImpl& h, const PromptEmbedding& prompt);

}  // namespace promptseg
