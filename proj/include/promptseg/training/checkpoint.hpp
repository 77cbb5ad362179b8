// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Versioned checkpoint archives. A checkpoint is a pickled dict (readable
// with torch.load) holding the format version, the model kind, the config
// echo as JSON, named parameters and buffers, and optionally the training
// state needed to resume.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>
#include <torch/nn/module.h>

#include "promptseg/core/parameter_snapshot.hpp"
#include "promptseg/prompt_generator/prompt_generator.hpp"
#include "promptseg/surrogate/surrogate_decoder.hpp"

namespace promptseg {

inline constexpr int64_t kCheckpointFormatVersion = 1;

enum class CheckpointKind { kGenerator, kSurrogate };

std::string to_string(CheckpointKind k);

struct TrainState {
  int64_t epoch = 0;        // epoch in progress
  int64_t global_step = 0;  // optimizer steps taken
  int64_t next_batch = 0;   // first batch of `epoch` not yet trained on
  double best_val_dice = -1.0;
  // Running sums of the epoch in progress, weighted by batch size.
  double epoch_loss_sum = 0.0;
  double epoch_bce_sum = 0.0;
  double epoch_dice_loss_sum = 0.0;
  double epoch_dice_sum = 0.0;
  int64_t epoch_samples = 0;
  torch::Tensor torch_rng_state;  // default CPU generator
  std::string optimizer_state;    // serialized optimizer archive
};

struct Checkpoint {
  int64_t format_version = kCheckpointFormatVersion;
  CheckpointKind kind = CheckpointKind::kGenerator;
  nlohmann::json config;  // {"model": ..., "train": ...}
  NamedTensors parameters;
  NamedTensors buffers;
  std::optional<TrainState> state;
  std::string generator_digest;  // surrogate checkpoints: digest of the g they read
};

/// Parameters and buffers of `module`, detached clones.
Checkpoint capture_module(const torch::nn::Module& module, CheckpointKind kind,
                          nlohmann::json config);

/// Copies the checkpoint tensors into `module`; throws std::runtime_error on
/// any missing, extra or mis-shaped entry.
void restore_module(torch::nn::Module& module, const Checkpoint& checkpoint);

/// Writes to a temporary file and renames it into place.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

PromptGenerator load_generator(const std::string& path);
SurrogateDecoder load_surrogate(const std::string& path);

}  // namespace promptseg
