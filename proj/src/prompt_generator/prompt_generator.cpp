// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/prompt_generator/prompt_generator.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>

#include <torch/serialize.h>
#include <torch/torch.h>

#include "promptseg/core/errors.hpp"

namespace promptseg {

namespace F = torch::nn::functional;

std::string to_string(Backbone b) {
  switch (b) {
    case Backbone::kHardNet85:
      return "hardnet85-like";
    case Backbone::kTinyTest:
      return "tiny-test";
  }
  return "unknown";
}

Backbone backbone_from_string(const std::string& s) {
  if (s == "hardnet85-like" || s == "hardnet85") return Backbone::kHardNet85;
  if (s == "tiny-test" || s == "tiny") return Backbone::kTinyTest;
  throw std::invalid_argument("unknown backbone '" + s + "'");
}

GeneratorConfig GeneratorConfig::hardnet85() {
  GeneratorConfig c;
  c.backbone = Backbone::kHardNet85;
  c.encoder_block_channels = {192, 256, 320, 480, 720, 1280};
  c.stem_channels = {48, 96};
  c.growth_rates = {24, 24, 28, 36, 48, 256};
  c.layers_per_block = {8, 16, 16, 16, 16, 4};
  c.downsample_after = {true, false, true, false, true, false};
  c.growth_multiplier = 1.7;
  c.dropout = 0.1;
  return c;
}

GeneratorConfig GeneratorConfig::tiny_test() {
  GeneratorConfig c;
  c.backbone = Backbone::kTinyTest;
  c.encoder_block_channels = {8, 8, 8, 8, 8, 8};
  c.stem_channels = {8, 8};
  c.growth_rates = {4, 4, 4, 4, 4, 4};
  c.layers_per_block = {2, 2, 2, 2, 2, 2};
  c.downsample_after = {true, false, true, false, true, false};
  c.growth_multiplier = 1.7;
  c.dropout = 0.0;
  return c;
}

void GeneratorConfig::validate() const {
  if (backbone == Backbone::kHardNet85 && encoder_block_channels.size() != 6) {
    throw std::invalid_argument("hardnet85-like backbone needs exactly 6 encoder block widths");
  }
  if (decoder_channels != kPromptChannels || output_spatial != kPromptSpatial) {
    throw std::invalid_argument(
        "generator output must be 256 channels at 64x64 to fill the dense prompt slot");
  }
  if (pretrained_backbone && pretrained_path.empty()) {
    throw MissingWeightsError("pretrained_backbone requested but pretrained_path is empty");
  }
  encoder_spec().validate();
}

HarDNetSpec GeneratorConfig::encoder_spec() const {
  HarDNetSpec spec;
  spec.stem_channels = stem_channels;
  spec.block_channels = encoder_block_channels;
  spec.growth_rates = growth_rates;
  spec.layers_per_block = layers_per_block;
  spec.downsample_after = downsample_after;
  spec.growth_multiplier = growth_multiplier;
  spec.dropout = dropout;
  return spec;
}

nlohmann::json GeneratorConfig::to_json() const {
  return {{"backbone", to_string(backbone)},
          {"encoder_block_channels", encoder_block_channels},
          {"decoder_channels", decoder_channels},
          {"output_spatial", output_spatial},
          {"pretrained_backbone", pretrained_backbone},
          {"pretrained_path", pretrained_path},
          {"seed", seed},
          {"stem_channels", stem_channels},
          {"growth_rates", growth_rates},
          {"layers_per_block", layers_per_block},
          {"downsample_after", downsample_after},
          {"growth_multiplier", growth_multiplier},
          {"dropout", dropout}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  // Start from the named preset so partial configs only override what they set.
  const auto backbone = backbone_from_string(j.value("backbone", std::string("hardnet85-like")));
  GeneratorConfig c = backbone == Backbone::kTinyTest ? tiny_test() : hardnet85();
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("encoder_block_channels", c.encoder_block_channels);
  read("decoder_channels", c.decoder_channels);
  read("output_spatial", c.output_spatial);
  read("pretrained_backbone", c.pretrained_backbone);
  read("pretrained_path", c.pretrained_path);
  read("seed", c.seed);
  read("stem_channels", c.stem_channels);
  read("growth_rates", c.growth_rates);
  read("layers_per_block", c.layers_per_block);
  read("downsample_after", c.downsample_after);
  read("growth_multiplier", c.growth_multiplier);
  read("dropout", c.dropout);
  return c;
}

UpBlockImpl::UpBlockImpl(int64_t in_channels, int64_t skip_channels, int64_t out_channels) {
  conv1 = register_module(
      "conv1", torch::nn::Conv2d(
                   torch::nn::Conv2dOptions(in_channels + skip_channels, out_channels, 3).padding(1)));
  conv2 = register_module(
      "conv2",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(out_channels, out_channels, 3).padding(1).bias(false)));
  bn = register_module("bn", torch::nn::BatchNorm2d(out_channels));
}

torch::Tensor UpBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& skip) {
  torch::Tensor up = x;
  if (x.size(2) != skip.size(2) || x.size(3) != skip.size(3)) {
    up = F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{skip.size(2), skip.size(3)})
                               .mode(torch::kBilinear)
                               .align_corners(false));
  }
  auto h = torch::relu(conv1(torch::cat({up, skip}, 1)));
  return torch::tanh(bn(conv2(h)));
}

PromptGeneratorImpl::PromptGeneratorImpl(GeneratorConfig config) : config_(std::move(config)) {
  config_.validate();
  encoder = register_module("encoder", HarDNetEncoder(config_.encoder_spec()));
  up1 = register_module("up1", UpBlock(encoder->deepest_channels(), encoder->stride8_channels(),
                                       config_.decoder_channels));
  up2 = register_module("up2", UpBlock(config_.decoder_channels, encoder->stride4_channels(),
                                       config_.decoder_channels));
}

torch::Tensor normalize_for_backbone(const torch::Tensor& images) {
  auto opts = images.options();
  auto mean = torch::tensor({0.485, 0.456, 0.406}, opts).view({1, 3, 1, 1});
  auto std = torch::tensor({0.229, 0.224, 0.225}, opts).view({1, 3, 1, 1});
  return (images - mean) / std;
}

torch::Tensor PromptGeneratorImpl::forward(const torch::Tensor& images) {
  require_image_batch(images);
  require_finite(images, "generator input");
  auto features = encoder->forward(normalize_for_backbone(images));
  auto z = up1->forward(features.deepest, features.stride8);
  z = up2->forward(z, features.stride4);
  const int64_t side = config_.output_spatial;
  if (z.size(2) != side || z.size(3) != side) {
    z = F::interpolate(z, F::InterpolateFuncOptions()
                              .size(std::vector<int64_t>{side, side})
                              .mode(torch::kBilinear)
                              .align_corners(false));
  }
  return z;
}

int64_t PromptGeneratorImpl::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : parameters()) n += p.numel();
  return n;
}

void PromptGeneratorImpl::zero_output_layer() {
  torch::NoGradGuard no_grad;
  up2->conv2->weight.zero_();
}

void kaiming_init(torch::nn::Module& module, uint64_t seed) {
  torch::NoGradGuard no_grad;
  auto gen = at::detail::createCPUGenerator(seed);
  for (const auto& m : module.modules(/*include_self=*/true)) {
    if (auto* conv = m->as<torch::nn::Conv2d>()) {
      auto& w = conv->weight;
      const double fan_in = static_cast<double>(w.size(1) * w.size(2) * w.size(3));
      w.normal_(0.0, std::sqrt(2.0 / fan_in), gen);
      if (conv->bias.defined()) conv->bias.zero_();
    } else if (auto* deconv = m->as<torch::nn::ConvTranspose2d>()) {
      auto& w = deconv->weight;
      const double fan_in = static_cast<double>(w.size(1) * w.size(2) * w.size(3));
      w.normal_(0.0, std::sqrt(2.0 / fan_in), gen);
      if (deconv->bias.defined()) deconv->bias.zero_();
    } else if (auto* bn = m->as<torch::nn::BatchNorm2d>()) {
      bn->weight.fill_(1.0);
      bn->bias.zero_();
    }
  }
}

namespace {

std::map<std::string, torch::Tensor> read_state_dict(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingWeightsError("cannot open backbone weights '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  c10::IValue value;
  try {
    value = torch::pickle_load(bytes);
  } catch (const c10::Error& e) {
    throw MissingWeightsError("backbone weights '" + path +
                              "' are not a torch.save'd state dict: " + e.what_without_backtrace());
  }
  if (!value.isGenericDict()) {
    throw MissingWeightsError("backbone weights '" + path + "' do not hold a name->tensor dict");
  }
  std::map<std::string, torch::Tensor> out;
  for (const auto& item : value.toGenericDict()) {
    if (!item.key().isString() || !item.value().isTensor()) continue;
    std::string key = item.key().toStringRef();
    for (const char* prefix : {"module.", "backbone."}) {
      if (key.rfind(prefix, 0) == 0) key = key.substr(std::string(prefix).size());
    }
    out.emplace(std::move(key), item.value().toTensor());
  }
  return out;
}

}  // namespace

void load_backbone_weights(PromptGeneratorImpl& g, const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingWeightsError("pretrained backbone requested but '" + path + "' does not exist");
  }
  const auto state = read_state_dict(path);
  torch::NoGradGuard no_grad;
  std::vector<std::string> missing;
  auto copy = [&](const std::string& name, torch::Tensor& dst) {
    auto it = state.find(name);
    if (it == state.end() || it->second.sizes() != dst.sizes()) {
      missing.push_back(name);
      return;
    }
    dst.copy_(it->second.to(dst.dtype()));
  };
  for (auto& item : g.encoder->named_parameters(true)) copy(item.key(), item.value());
  for (auto& item : g.encoder->named_buffers(true)) copy(item.key(), item.value());
  if (!missing.empty()) {
    std::string list;
    for (size_t i = 0; i < missing.size() && i < 5; ++i) list += (i ? ", " : "") + missing[i];
    throw MissingWeightsError("backbone weights '" + path + "' lack " +
                              std::to_string(missing.size()) + " encoder tensors (" + list +
                              (missing.size() > 5 ? ", ..." : "") + ")");
  }
}

PromptGenerator build_prompt_generator(const GeneratorConfig& config) {
  PromptGenerator g(config);
  kaiming_init(*g, config.seed);
  if (config.pretrained_backbone) load_backbone_weights(*g, config.pretrained_path);
  return g;
}

PromptEmbedding generate_prompt(PromptGeneratorImpl& g, const Image& image) {
  auto batch = image.pixels().unsqueeze(0);
  auto param = g.parameters().front();
  auto z = g.forward(batch.to(param.dtype()));
  return PromptEmbedding(z.squeeze(0));
}

}  // namespace promptseg
