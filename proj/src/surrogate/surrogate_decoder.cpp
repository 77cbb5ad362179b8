// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/surrogate/surrogate_decoder.hpp"

#include <torch/torch.h>

#include "promptseg/prompt_generator/prompt_generator.hpp"

namespace promptseg {

nlohmann::json SurrogateConfig::to_json() const {
  return {{"hidden_channels", hidden_channels}, {"seed", seed}};
}

SurrogateConfig SurrogateConfig::from_json(const nlohmann::json& j) {
  SurrogateConfig c;
  c.hidden_channels = j.value("hidden_channels", c.hidden_channels);
  c.seed = j.value("seed", c.seed);
  return c;
}

SurrogateDecoderImpl::SurrogateDecoderImpl(SurrogateConfig config) : config_(config) {
  if (config_.hidden_channels <= 0) {
    throw std::invalid_argument("surrogate decoder: hidden_channels must be positive");
  }
  auto deconv = [](int64_t in, int64_t out) {
    return torch::nn::ConvTranspose2d(
        torch::nn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1));
  };
  up1 = register_module("up1", deconv(kPromptChannels, config_.hidden_channels));
  up2 = register_module("up2", deconv(config_.hidden_channels, 1));
}

torch::Tensor SurrogateDecoderImpl::forward(const torch::Tensor& prompts) {
  require_prompt_batch(prompts);
  return up2(torch::relu(up1(prompts)));
}

int64_t SurrogateDecoderImpl::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : parameters()) n += p.numel();
  return n;
}

void SurrogateDecoderImpl::zero_parameters() {
  torch::NoGradGuard no_grad;
  for (auto& p : parameters()) p.zero_();
}

SurrogateDecoder build_surrogate_decoder(const SurrogateConfig& config) {
  SurrogateDecoder h(config);
  kaiming_init(*h, config.seed);
  return h;
}

LogitMap surrogate_forward(SurrogateDecoderImpl& h, const PromptEmbedding& prompt) {
  auto param = h.parameters().front();
  return LogitMap(h.forward(prompt.values().unsqueeze(0).to(param.dtype()))[0][0]);
}

}  // namespace promptseg
