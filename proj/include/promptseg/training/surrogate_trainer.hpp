// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Trains the surrogate decoder h on the prompts of a fixed generator g. g
// runs in eval mode without gradients and its digest (parameters and
// buffers) is verified like any other frozen module.

#pragma once

#include <string>

#include "promptseg/surrogate/surrogate_decoder.hpp"
#include "promptseg/training/trainer.hpp"

namespace promptseg {

class SurrogateTrainer : public TrainerBase {
 public:
  SurrogateTrainer(TrainConfig config, SurrogateDecoder decoder, PromptGenerator generator);
  /// Builds h from config.surrogate and loads g from config.generator_checkpoint.
  explicit SurrogateTrainer(TrainConfig config);

  SurrogateDecoder decoder() const { return h_; }
  PromptGenerator generator() const { return g_; }
  /// Digest of g recorded in every checkpoint this trainer writes.
  const std::string& generator_digest() const { return g_digest_; }

 protected:
  torch::Tensor predict(const torch::Tensor& images, int64_t height, int64_t width) override;
  torch::nn::Module& trainable() override { return *h_; }
  nlohmann::json model_config() const override { return h_->config().to_json(); }
  std::vector<std::pair<std::string, ParameterSnapshot>> frozen_snapshots() const override;
  void decorate_checkpoint(Checkpoint& c) const override { c.generator_digest = g_digest_; }
  void check_resumable(const Checkpoint& c) const override;

 private:
  SurrogateDecoder h_;
  PromptGenerator g_;
  std::string g_digest_;
};

/// h(g(I)) logits [B, 1, height, width] for images [B, 3, H, W].
torch::Tensor surrogate_predict(SurrogateDecoderImpl& h, PromptGeneratorImpl& g,
                                const torch::Tensor& images, int64_t height, int64_t width);

/// Dataset and split handling as in train_generator.
FitResult train_surrogate(const TrainConfig& config, const std::string& resume_from = "");

}  // namespace promptseg
