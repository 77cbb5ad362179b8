// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/prompt_generator/hardnet.hpp"

#include <stdexcept>

#include <torch/torch.h>

namespace promptseg {

namespace {

struct LinkInfo {
  int64_t out_channels;
  int64_t in_channels;
  std::vector<int64_t> links;
};

// Layer k of a HarD block reads from every earlier layer k - 2^i that divides
// k, and widens by growth_multiplier per extra link, rounded to an even width.
LinkInfo get_link(int64_t layer, int64_t base_channels, int64_t growth_rate, double grmul) {
  if (layer == 0) return {base_channels, 0, {}};
  double out = static_cast<double>(growth_rate);
  std::vector<int64_t> links;
  for (int i = 0; i < 10; ++i) {
    const int64_t dv = int64_t{1} << i;
    if (layer % dv == 0) {
      links.push_back(layer - dv);
      if (i > 0) out *= grmul;
    }
  }
  const auto out_channels = static_cast<int64_t>(static_cast<int64_t>(out + 1) / 2) * 2;
  int64_t in_channels = 0;
  for (int64_t k : links) in_channels += get_link(k, base_channels, growth_rate, grmul).out_channels;
  return {out_channels, in_channels, std::move(links)};
}

}  // namespace

void HarDNetSpec::validate() const {
  const size_t n = block_channels.size();
  if (stem_channels.size() != 2) throw std::invalid_argument("HarDNet: stem needs two widths");
  if (n == 0 || growth_rates.size() != n || layers_per_block.size() != n ||
      downsample_after.size() != n) {
    throw std::invalid_argument("HarDNet: per-block lists must have equal, nonzero length");
  }
  int downsamples = 0;
  for (size_t i = 0; i < n; ++i) {
    if (block_channels[i] <= 0 || growth_rates[i] <= 0 || layers_per_block[i] <= 0) {
      throw std::invalid_argument("HarDNet: widths and layer counts must be positive");
    }
    downsamples += downsample_after[i] ? 1 : 0;
  }
  if (downsample_after.back() || downsamples != 3 || downsample_after.front() != true) {
    throw std::invalid_argument(
        "HarDNet: expected three downsampling transitions, the first after block 0 and none "
        "after the last block");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("HarDNet: dropout in [0, 1)");
}

HarDBlockPlan HarDBlockPlan::make(int64_t in_channels, int64_t growth_rate,
                                  double growth_multiplier, int64_t n_layers) {
  HarDBlockPlan plan;
  for (int64_t i = 0; i < n_layers; ++i) {
    auto info = get_link(i + 1, in_channels, growth_rate, growth_multiplier);
    plan.layers.push_back({info.in_channels, info.out_channels, std::move(info.links)});
    if (i % 2 == 0 || i == n_layers - 1) plan.out_channels += info.out_channels;
  }
  return plan;
}

bool HarDBlockPlan::keeps_output(size_t index) const {
  // index 0 is the block input, which is not kept
  const size_t total = layers.size() + 1;
  return index == total - 1 || index % 2 == 1;
}

ConvLayerImpl::ConvLayerImpl(int64_t in_channels, int64_t out_channels, int64_t kernel,
                             int64_t stride) {
  conv = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, out_channels, kernel)
                                    .stride(stride)
                                    .padding(kernel / 2)
                                    .bias(false)));
  norm = register_module("norm", torch::nn::BatchNorm2d(out_channels));
}

torch::Tensor ConvLayerImpl::forward(const torch::Tensor& x) {
  return torch::hardtanh(norm(conv(x)), 0.0, 6.0);
}

HarDBlockImpl::HarDBlockImpl(HarDBlockPlan plan) : plan_(std::move(plan)) {
  layers_ = register_module("layers", torch::nn::ModuleList());
  for (const auto& layer : plan_.layers) {
    layers_->push_back(ConvLayer(layer.in_channels, layer.out_channels, 3));
  }
}

torch::Tensor HarDBlockImpl::forward(const torch::Tensor& x) {
  std::vector<torch::Tensor> outputs{x};
  outputs.reserve(plan_.layers.size() + 1);
  for (size_t k = 0; k < plan_.layers.size(); ++k) {
    const auto& links = plan_.layers[k].links;
    torch::Tensor in;
    if (links.size() == 1) {
      in = outputs[links.front()];
    } else {
      std::vector<torch::Tensor> parts;
      parts.reserve(links.size());
      for (int64_t j : links) parts.push_back(outputs[j]);
      in = torch::cat(parts, 1);
    }
    outputs.push_back(layers_[k]->as<ConvLayer>()->forward(in));
  }
  std::vector<torch::Tensor> kept;
  for (size_t i = 0; i < outputs.size(); ++i) {
    if (plan_.keeps_output(i)) kept.push_back(outputs[i]);
  }
  return torch::cat(kept, 1);
}

HarDNetEncoderImpl::HarDNetEncoderImpl(const HarDNetSpec& spec) : dropout_(spec.dropout) {
  spec.validate();
  base_ = register_module("base", torch::nn::ModuleList());
  auto add = [&](std::shared_ptr<torch::nn::Module> m, StepKind kind, int stride) {
    base_->push_back(std::move(m));
    steps_.push_back({kind, static_cast<int64_t>(base_->size()) - 1, stride});
  };

  add(ConvLayer(3, spec.stem_channels[0], 3, 2).ptr(), StepKind::kConv, 2);
  add(ConvLayer(spec.stem_channels[0], spec.stem_channels[1], 3).ptr(), StepKind::kConv, 2);
  add(torch::nn::MaxPool2d(torch::nn::MaxPool2dOptions(3).stride(2).padding(1)).ptr(),
      StepKind::kMaxPool3, 4);

  int stride = 4;
  int64_t ch = spec.stem_channels[1];
  const size_t n_blocks = spec.block_channels.size();
  for (size_t i = 0; i < n_blocks; ++i) {
    auto plan = HarDBlockPlan::make(ch, spec.growth_rates[i], spec.growth_multiplier,
                                    spec.layers_per_block[i]);
    const int64_t block_out = plan.out_channels;
    add(HarDBlock(std::move(plan)).ptr(), StepKind::kBlock, stride);
    if (i + 1 == n_blocks) {
      add(torch::nn::Dropout(torch::nn::DropoutOptions(spec.dropout)).ptr(), StepKind::kDropout,
          stride);
    }
    add(ConvLayer(block_out, spec.block_channels[i], 1).ptr(), StepKind::kConv, stride);
    ch = spec.block_channels[i];
    if (stride == 4) {
      tap4_ = steps_.size() - 1;
      stride4_channels_ = ch;
    } else if (stride == 8) {
      tap8_ = steps_.size() - 1;
      stride8_channels_ = ch;
    }
    if (spec.downsample_after[i]) {
      stride *= 2;
      add(torch::nn::MaxPool2d(torch::nn::MaxPool2dOptions(2).stride(2)).ptr(),
          StepKind::kMaxPool2, stride);
    }
  }
  deepest_channels_ = ch;
}

EncoderFeatures HarDNetEncoderImpl::forward(const torch::Tensor& input) {
  EncoderFeatures features;
  torch::Tensor x = input;
  for (size_t s = 0; s < steps_.size(); ++s) {
    const auto& step = steps_[s];
    auto module = base_[step.module_index];
    switch (step.kind) {
      case StepKind::kConv:
        x = module->as<ConvLayer>()->forward(x);
        break;
      case StepKind::kBlock:
        x = module->as<HarDBlock>()->forward(x);
        break;
      case StepKind::kMaxPool3:
      case StepKind::kMaxPool2:
        x = module->as<torch::nn::MaxPool2d>()->forward(x);
        break;
      case StepKind::kDropout:
        if (dropout_ > 0.0) x = module->as<torch::nn::Dropout>()->forward(x);
        break;
    }
    if (s == tap4_) features.stride4 = x;
    if (s == tap8_) features.stride8 = x;
  }
  features.deepest = x;
  return features;
}

}  // namespace promptseg
