// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Harmonic densely connected encoder. Module and parameter names follow the
// reference HarDNet layout ("base.<i>.conv.weight", "base.<i>.layers.<j>...")
// so ImageNet checkpoints of that family load without renaming.

#pragma once

#include <cstdint>
#include <vector>

#include <torch/nn/module.h>
#include <torch/nn/modules/batchnorm.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/pimpl.h>

namespace promptseg {

struct HarDNetSpec {
  std::vector<int64_t> stem_channels;    // two entries
  std::vector<int64_t> block_channels;   // transition conv width after each block
  std::vector<int64_t> growth_rates;
  std::vector<int64_t> layers_per_block;
  std::vector<bool> downsample_after;
  double growth_multiplier = 1.7;
  double dropout = 0.0;  // before the last transition conv

  void validate() const;
};

/// Link structure of one HarD block: which earlier outputs feed layer k and how
/// wide each layer is.
struct HarDBlockPlan {
  struct Layer {
    int64_t in_channels;
    int64_t out_channels;
    std::vector<int64_t> links;  // indices into [block input, layer 0 out, ...]
  };
  std::vector<Layer> layers;
  int64_t out_channels = 0;

  static HarDBlockPlan make(int64_t in_channels, int64_t growth_rate, double growth_multiplier,
                            int64_t n_layers);
  /// Which entries of [input, layer outputs...] are concatenated into the block output.
  bool keeps_output(size_t index) const;
};

/// conv(k, stride, pad=k/2, no bias) -> batch norm -> ReLU6.
class ConvLayerImpl : public torch::nn::Module {
 public:
  ConvLayerImpl(int64_t in_channels, int64_t out_channels, int64_t kernel, int64_t stride = 1);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv{nullptr};
  torch::nn::BatchNorm2d norm{nullptr};
};
TORCH_MODULE(ConvLayer);

class HarDBlockImpl : public torch::nn::Module {
 public:
  explicit HarDBlockImpl(HarDBlockPlan plan);
  torch::Tensor forward(const torch::Tensor& x);
  int64_t out_channels() const { return plan_.out_channels; }

 private:
  HarDBlockPlan plan_;
  torch::nn::ModuleList layers_;
};
TORCH_MODULE(HarDBlock);

/// Feature maps handed to the decoder.
struct EncoderFeatures {
  torch::Tensor stride4;   // last stage output at 1/4 resolution
  torch::Tensor stride8;   // last stage output at 1/8 resolution
  torch::Tensor deepest;   // final stage output
};

class HarDNetEncoderImpl : public torch::nn::Module {
 public:
  explicit HarDNetEncoderImpl(const HarDNetSpec& spec);
  EncoderFeatures forward(const torch::Tensor& x);

  int64_t stride4_channels() const { return stride4_channels_; }
  int64_t stride8_channels() const { return stride8_channels_; }
  int64_t deepest_channels() const { return deepest_channels_; }

 private:
  enum class StepKind { kConv, kBlock, kMaxPool3, kMaxPool2, kDropout };
  struct Step {
    StepKind kind;
    int64_t module_index;  // index in base_, or -1 for parameter-free steps
    int stride_after;      // cumulative stride after this step
  };

  torch::nn::ModuleList base_;
  std::vector<Step> steps_;
  double dropout_ = 0.0;
  size_t tap4_ = 0, tap8_ = 0;
  int64_t stride4_channels_ = 0, stride8_channels_ = 0, deepest_channels_ = 0;
};
TORCH_MODULE(HarDNetEncoder);

}  // namespace promptseg
