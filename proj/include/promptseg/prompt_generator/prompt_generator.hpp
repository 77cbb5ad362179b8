// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// The trainable prompt generator: a HarDNet encoder followed by two upsampling
// blocks that produce a dense 256 x 64 x 64 prompt embedding in [-1, 1]. It is
// the only network that receives gradient updates when adapting the frozen
// segmenter.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/nn/module.h>
#include <torch/nn/modules/batchnorm.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/pimpl.h>

#include "promptseg/core/types.hpp"
#include "promptseg/prompt_generator/hardnet.hpp"

namespace promptseg {

enum class Backbone { kHardNet85, kTinyTest };

std::string to_string(Backbone b);
Backbone backbone_from_string(const std::string& s);

struct GeneratorConfig {
  Backbone backbone = Backbone::kHardNet85;
  std::vector<int64_t> encoder_block_channels;
  int64_t decoder_channels = kPromptChannels;
  int64_t output_spatial = kPromptSpatial;
  bool pretrained_backbone = false;
  std::string pretrained_path;  // reference HarDNet state dict (torch.save'd)
  uint64_t seed = 0;

  // Backbone-family hyperparameters.
  std::vector<int64_t> stem_channels;
  std::vector<int64_t> growth_rates;
  std::vector<int64_t> layers_per_block;
  std::vector<bool> downsample_after;
  double growth_multiplier = 1.7;
  double dropout = 0.0;

  static GeneratorConfig hardnet85();
  /// Same topology with every width shrunk, for CPU tests.
  static GeneratorConfig tiny_test();

  void validate() const;
  HarDNetSpec encoder_spec() const;

  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
};

/// Resize the incoming map to the skip's resolution, concatenate, then
/// conv3x3 -> ReLU -> conv3x3 -> BN -> tanh.
class UpBlockImpl : public torch::nn::Module {
 public:
  UpBlockImpl(int64_t in_channels, int64_t skip_channels, int64_t out_channels);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& skip);

  torch::nn::Conv2d conv1{nullptr};
  torch::nn::Conv2d conv2{nullptr};
  torch::nn::BatchNorm2d bn{nullptr};
};
TORCH_MODULE(UpBlock);

class PromptGeneratorImpl : public torch::nn::Module {
 public:
  explicit PromptGeneratorImpl(GeneratorConfig config);

  /// images: [B, 3, H, W] in [0, 1]. Returns [B, 256, 64, 64].
  torch::Tensor forward(const torch::Tensor& images);

  const GeneratorConfig& config() const { return config_; }
  int64_t parameter_count() const;

  /// Zeroes the last decoder convolution so the output is tanh(0) = 0 for
  /// any input.
  void zero_output_layer();

  HarDNetEncoder encoder{nullptr};
  UpBlock up1{nullptr};
  UpBlock up2{nullptr};

 private:
  GeneratorConfig config_;
};
TORCH_MODULE(PromptGenerator);

/// Builds and initializes g. Decoder (and the encoder when not pretrained)
/// gets fan-in normal init from `config.seed`; BN scale 1, shift 0. When
/// `pretrained_backbone` is set, encoder weights come from `pretrained_path`
/// and MissingWeightsError is thrown if the file is absent or incomplete.
PromptGenerator build_prompt_generator(const GeneratorConfig& config);

/// Loads ImageNet encoder weights from a reference HarDNet state dict.
void load_backbone_weights(PromptGeneratorImpl& g, const std::string& path);

/// Single-image forward; respects the module's current train/eval mode.
PromptEmbedding generate_prompt(PromptGeneratorImpl& g, const Image& image);

/// Per-channel input normalization of the ImageNet-pretrained backbone.
torch::Tensor normalize_for_backbone(const torch::Tensor& images);

/// Fan-in (Kaiming) normal init for every conv of `module`, BN to (1, 0).
void kaiming_init(torch::nn::Module& module, uint64_t seed);

}  // namespace promptseg
