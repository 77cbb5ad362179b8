// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/training/surrogate_trainer.hpp"

#include <stdexcept>

#include <c10/util/Logging.h>
#include <torch/torch.h>

namespace promptseg {

namespace F = torch::nn::functional;

namespace {

PromptGenerator freeze(PromptGenerator g) {
  g->eval();
  for (auto& p : g->parameters()) p.requires_grad_(false);
  return g;
}

PromptGenerator generator_from(const TrainConfig& config) {
  if (config.generator_checkpoint.empty()) {
    throw std::invalid_argument("surrogate training needs generator_checkpoint");
  }
  return load_generator(config.generator_checkpoint);
}

}  // namespace

torch::Tensor surrogate_predict(SurrogateDecoderImpl& h, PromptGeneratorImpl& g,
                                const torch::Tensor& images, int64_t height, int64_t width) {
  torch::Tensor prompts;
  {
    torch::NoGradGuard no_grad;
    prompts = g.forward(images);
  }
  auto logits = h.forward(prompts);
  if (logits.size(2) == height && logits.size(3) == width) return logits;
  return F::interpolate(logits, F::InterpolateFuncOptions()
                                    .size(std::vector<int64_t>{height, width})
                                    .mode(torch::kBilinear)
                                    .align_corners(false));
}

SurrogateTrainer::SurrogateTrainer(TrainConfig config, SurrogateDecoder decoder,
                                   PromptGenerator generator)
    : TrainerBase(std::move(config), CheckpointKind::kSurrogate),
      h_(std::move(decoder)),
      g_(freeze(std::move(generator))) {
  g_digest_ = snapshot_parameters(*g_, SnapshotScope::kParametersAndBuffers).global_checksum;
  initialize();
}

SurrogateTrainer::SurrogateTrainer(TrainConfig config)
    : SurrogateTrainer(config, build_surrogate_decoder(config.surrogate), generator_from(config)) {}

torch::Tensor SurrogateTrainer::predict(const torch::Tensor& images, int64_t height,
                                        int64_t width) {
  g_->eval();  // g stays in inference mode whatever mode h is in
  return surrogate_predict(*h_, *g_, images, height, width);
}

std::vector<std::pair<std::string, ParameterSnapshot>> SurrogateTrainer::frozen_snapshots() const {
  return {{"prompt generator", snapshot_parameters(*g_, SnapshotScope::kParametersAndBuffers)}};
}

void SurrogateTrainer::check_resumable(const Checkpoint& c) const {
  if (c.generator_digest != g_digest_) {
    throw std::runtime_error("surrogate checkpoint was trained against generator " +
                             c.generator_digest + ", not " + g_digest_);
  }
}

FitResult train_surrogate(const TrainConfig& config, const std::string& resume_from) {
  auto spec = config.dataset;
  spec.root_dir = resolve_data_root(spec.root_dir);
  const auto data = open_dataset(spec);
  for (const auto& w : data.warnings) LOG(WARNING) << w;
  const auto [train, val] = holdout_split(data, config.val_fraction, config.seed);
  SurrogateTrainer trainer(config);
  if (!resume_from.empty()) trainer.resume(resume_from);
  return trainer.fit(train, val);
}

}  // namespace promptseg
