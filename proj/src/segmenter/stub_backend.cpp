// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/segmenter/stub_backend.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <torch/torch.h>

#include "promptseg/core/errors.hpp"

namespace promptseg {

namespace F = torch::nn::functional;

namespace {

constexpr int64_t kPatchChannels = 32;
constexpr int64_t kHiddenChannels = 32;

torch::nn::Conv2d conv(int64_t in, int64_t out, int64_t k, bool bias) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, k).stride(k).bias(bias));
}

}  // namespace

StubNetImpl::StubNetImpl(int64_t input_resolution, uint64_t seed) {
  const int64_t k = input_resolution / kPromptSpatial;
  patch = register_module("patch", conv(kImageChannels, kPatchChannels, k, true));
  embed = register_module("embed", conv(kPatchChannels, kPromptChannels, 1, true));
  from_image = register_module("from_image", conv(kPromptChannels, kHiddenChannels, 1, true));
  from_prompt = register_module("from_prompt", conv(kPromptChannels, kHiddenChannels, 1, false));
  head = register_module("head", conv(kHiddenChannels, 1, 1, true));

  torch::NoGradGuard no_grad;
  auto gen = at::detail::createCPUGenerator(seed);
  auto fill = [&gen](torch::Tensor& t, double std) { t.normal_(0.0, std, gen); };
  const double patch_fan = static_cast<double>(kImageChannels * k * k);
  fill(patch->weight, 1.0 / std::sqrt(patch_fan));
  fill(patch->bias, 0.1);
  fill(embed->weight, 1.0 / std::sqrt(static_cast<double>(kPatchChannels)));
  fill(embed->bias, 0.1);
  fill(from_image->weight, 0.5 / std::sqrt(static_cast<double>(kPromptChannels)));
  fill(from_image->bias, 0.1);
  // Nonnegative prompt and head weights make the logits monotone in the prompt.
  fill(from_prompt->weight, 1.0 / std::sqrt(static_cast<double>(kPromptChannels)));
  from_prompt->weight.abs_();
  fill(head->weight, 0.5);
  head->weight.abs_();
  head->bias.zero_();

  for (auto& p : parameters()) p.requires_grad_(false);
  eval();
}

StubBackend::StubBackend(const BackendConfig& config) : resolution_(config.input_resolution) {
  config.validate();
  net_ = StubNet(resolution_, config.seed);
}

torch::Tensor StubBackend::encode_images(const torch::Tensor& images) {
  require_image_batch(images);
  require_finite(images, "segmenter input");
  torch::NoGradGuard no_grad;
  auto dtype = net_->patch->weight.scalar_type();
  auto x = images.to(dtype);
  if (x.size(2) != resolution_ || x.size(3) != resolution_) {
    x = F::interpolate(x, F::InterpolateFuncOptions()
                              .size(std::vector<int64_t>{resolution_, resolution_})
                              .mode(torch::kBilinear)
                              .align_corners(false));
  }
  x = torch::tanh(net_->patch(x * 2.0 - 1.0));
  return net_->embed(x);
}

torch::Tensor StubBackend::decode_masks(const torch::Tensor& embeddings,
                                        const torch::Tensor& prompts) {
  require_prompt_batch(prompts);
  const std::vector<int64_t> expected{prompts.size(0), kPromptChannels, kPromptSpatial,
                                      kPromptSpatial};
  if (embeddings.sizes().vec() != expected) {
    throw ShapeError::mismatch("stub image embedding", expected, embeddings.sizes().vec());
  }
  auto hidden = torch::tanh(net_->from_image(embeddings.to(prompts.scalar_type())) +
                            net_->from_prompt(prompts));
  auto low = net_->head(hidden);
  return F::interpolate(low, F::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{kDecoderNativeSide, kDecoderNativeSide})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
}

ParameterSnapshot StubBackend::snapshot() const {
  return snapshot_parameters(*net_, SnapshotScope::kParametersAndBuffers);
}

}  // namespace promptseg
