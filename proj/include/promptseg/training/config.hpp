// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Declarative run configuration. Every key has a default, so a config file
// only lists what it changes. Relative dataset roots resolve against the
// PROMPTSEG_DATA_ROOT environment variable when it is set.

#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "promptseg/data/dataset.hpp"
#include "promptseg/prompt_generator/prompt_generator.hpp"
#include "promptseg/segmenter/backend.hpp"
#include "promptseg/surrogate/surrogate_decoder.hpp"

namespace promptseg {

inline constexpr const char* kDataRootEnv = "PROMPTSEG_DATA_ROOT";

struct TrainConfig {
  double learning_rate = 3e-4;
  double weight_decay = 1e-5;
  int64_t batch_size = 10;
  int64_t max_epochs = 200;
  int64_t max_steps = 0;  // 0: no step cap
  uint64_t seed = 0;
  bool deterministic = true;
  bool cosine_decay = false;
  double grad_clip_norm = 0.0;  // 0: off
  double val_fraction = 0.1;    // 0: the training set doubles as validation
  bool check_frozen_every_step = false;
  int64_t checkpoint_every_steps = 0;  // 0: epoch boundaries only
  std::string augmentation = "auto";   // "auto" picks the dataset's recipe

  GeneratorConfig generator = GeneratorConfig::hardnet85();
  BackendConfig backend = BackendConfig::foundation("weights/foundation");
  DatasetSpec dataset = DatasetSpec::defaults(DatasetName::kGlas, "glas", Split::kTrain);
  std::string checkpoint_dir = "runs/default";

  // Surrogate decoder runs only.
  SurrogateConfig surrogate;
  std::string generator_checkpoint;

  /// Recipe for g: batch 10, 200 epochs.
  static TrainConfig generator_recipe();
  /// Recipe for h: batch 24, 60 epochs.
  static TrainConfig surrogate_recipe();

  void validate() const;
  nlohmann::json to_json() const;
  /// Overlays `j` on `base`.
  static TrainConfig from_json(const nlohmann::json& j, const TrainConfig& base = generator_recipe());
};

TrainConfig load_train_config(const std::string& path, const TrainConfig& base);

/// Applies kDataRootEnv to a relative dataset root.
std::string resolve_data_root(const std::string& root);

}  // namespace promptseg
