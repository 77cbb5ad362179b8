// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training loops. A trainer owns one trainable network, an Adam optimizer
// over its parameters and the frozen modules it reads through. Every step
// computes seg_loss at ground-truth resolution; frozen modules are checked
// against their start-of-run digest at every epoch boundary.
//
// Data order is a seeded shuffle per epoch and augmentation draws come from a
// per-(epoch, sample) stream, so a run resumed from a mid-epoch checkpoint
// replays the exact batches of the uninterrupted run.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/nn/module.h>
#include <torch/optim/adam.h>

#include "promptseg/core/parameter_snapshot.hpp"
#include "promptseg/data/augment.hpp"
#include "promptseg/data/dataset.hpp"
#include "promptseg/losses/losses.hpp"
#include "promptseg/prompt_generator/prompt_generator.hpp"
#include "promptseg/segmenter/backend.hpp"
#include "promptseg/training/checkpoint.hpp"
#include "promptseg/training/config.hpp"

namespace promptseg {

struct StepResult {
  double loss = 0.0;
  double bce = 0.0;
  double dice_loss = 0.0;
  double dice = 0.0;  // hard Dice of the batch at threshold 0.5, sample mean
};

struct EpochRecord {
  int64_t epoch = 0;
  int64_t global_step = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double train_bce = 0.0;
  double train_dice_loss = 0.0;
  double train_dice = 0.0;
  double val_dice = 0.0;
  double seconds = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> epochs;  // epochs completed in this call
  TrainState state;
  bool stopped_by_step_limit = false;
  std::filesystem::path last_checkpoint;
  std::filesystem::path best_checkpoint;
  std::filesystem::path final_checkpoint;
  std::filesystem::path log_path;
};

/// Splits off round(n * fraction) samples (at least one when fraction > 0)
/// by a seeded shuffle. Returns (train, validation), each in index order.
/// With fraction 0 both halves are the full dataset.
std::pair<Dataset, Dataset> holdout_split(const Dataset& data, double fraction, uint64_t seed);

/// Stacks a batch of equally sized samples into images [B, 3, H, W] and
/// float masks [B, 1, H, W].
std::pair<torch::Tensor, torch::Tensor> collate(const std::vector<SampleRecord>& batch);

/// Mean over samples of the hard Dice at threshold 0.5 (1 when both masks
/// are empty).
double batch_dice(const torch::Tensor& logits, const torch::Tensor& masks);

/// Makes torch reproducible for `seed`: seeds the default generator, pins
/// intra-op threads to one and requests deterministic kernels.
void enable_determinism(uint64_t seed);

class TrainerBase {
 public:
  using StepCallback = std::function<void(int64_t global_step, const StepResult&)>;

  virtual ~TrainerBase() = default;

  const TrainConfig& config() const { return config_; }
  const TrainState& state() const { return state_; }

  /// One optimizer step on a prepared batch; returns the pre-step loss.
  StepResult train_step(const torch::Tensor& images, const torch::Tensor& masks);
  StepResult train_step(const std::vector<SampleRecord>& batch);

  /// Mean hard Dice over `data` in eval mode.
  double validate(const Dataset& data);

  /// Runs from the current state to config().max_epochs (or max_steps),
  /// writing <checkpoint_dir>/{last,best,final}.ckpt and train_log.csv.
  /// Throws before the first step when checkpoint_dir is not writable.
  FitResult fit(const Dataset& train, const Dataset& validation);

  /// Loads network weights, optimizer moments, counters and the torch RNG
  /// state from a checkpoint written by the same kind of trainer.
  void resume(const std::string& checkpoint_path);

  /// Checkpoint of the current network and, when `with_state`, the state
  /// needed to resume.
  Checkpoint make_checkpoint(bool with_state) const;

  /// Throws FrozenInvariantViolation if any frozen module changed since the
  /// trainer was built.
  void check_frozen() const;

  /// Called after every optimizer step.
  void set_step_callback(StepCallback cb) { step_callback_ = std::move(cb); }

  /// Overrides the augmentation recipe derived from the config.
  void set_augmentation(AugmentationRecipe recipe) { augment_ = std::move(recipe); }

 protected:
  TrainerBase(TrainConfig config, CheckpointKind kind);

  /// Must be called by the derived constructor once the networks exist.
  void initialize();

  /// Logits [B, 1, H, W] at the ground-truth resolution.
  virtual torch::Tensor predict(const torch::Tensor& images, int64_t height, int64_t width) = 0;
  virtual torch::nn::Module& trainable() = 0;
  const torch::nn::Module& trainable_const() const {
    return const_cast<TrainerBase*>(this)->trainable();
  }
  virtual nlohmann::json model_config() const = 0;
  /// Current digests of every frozen module, in a fixed order.
  virtual std::vector<std::pair<std::string, ParameterSnapshot>> frozen_snapshots() const = 0;
  virtual void decorate_checkpoint(Checkpoint&) const {}
  /// Throws when `c` cannot be resumed by this trainer.
  virtual void check_resumable(const Checkpoint&) const {}

 private:
  double current_learning_rate(int64_t total_steps) const;
  void check_writable() const;
  void save(const std::filesystem::path& path, bool with_state) const;

  TrainConfig config_;
  CheckpointKind kind_;
  TrainState state_;
  std::unique_ptr<torch::optim::Adam> optimizer_;
  std::vector<std::pair<std::string, ParameterSnapshot>> frozen_at_start_;
  AugmentationRecipe augment_;
  StepCallback step_callback_;
  int64_t planned_steps_ = 0;  // cosine horizon, set by fit
};

/// Trains the prompt generator g through the frozen segmenter.
class GeneratorTrainer : public TrainerBase {
 public:
  GeneratorTrainer(TrainConfig config, PromptGenerator generator,
                   std::shared_ptr<SegmenterBackend> backend);
  /// Builds g and the backend from the config.
  explicit GeneratorTrainer(TrainConfig config);

  PromptGenerator generator() const { return g_; }
  SegmenterBackend& backend() const { return *backend_; }
  std::shared_ptr<SegmenterBackend> backend_ptr() const { return backend_; }

 protected:
  torch::Tensor predict(const torch::Tensor& images, int64_t height, int64_t width) override;
  torch::nn::Module& trainable() override { return *g_; }
  nlohmann::json model_config() const override { return g_->config().to_json(); }
  std::vector<std::pair<std::string, ParameterSnapshot>> frozen_snapshots() const override;

 private:
  PromptGenerator g_;
  std::shared_ptr<SegmenterBackend> backend_;
};

/// Builds the dataset of config.dataset (root resolved against
/// PROMPTSEG_DATA_ROOT) and runs fit on its seeded holdout split.
FitResult train_generator(const TrainConfig& config, const std::string& resume_from = "");

}  // namespace promptseg
