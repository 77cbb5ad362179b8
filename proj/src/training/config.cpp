// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/training/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace promptseg {
namespace {

// Rejects keys that do not exist in `reference` so typos fail loudly.
void check_known_keys(const nlohmann::json& patch, const nlohmann::json& reference,
                      const std::string& prefix) {
  if (!patch.is_object()) return;
  for (const auto& [key, value] : patch.items()) {
    if (!reference.contains(key)) {
      throw std::invalid_argument("unknown config key '" + prefix + key + "'");
    }
    if (value.is_object() && reference.at(key).is_object()) {
      check_known_keys(value, reference.at(key), prefix + key + ".");
    }
  }
}

}  // namespace

TrainConfig TrainConfig::generator_recipe() { return TrainConfig{}; }

TrainConfig TrainConfig::surrogate_recipe() {
  TrainConfig c;
  c.batch_size = 24;
  c.max_epochs = 60;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw std::invalid_argument("val_fraction must lie in [0, 1)");
  }
  if (grad_clip_norm < 0.0) throw std::invalid_argument("grad_clip_norm must be >= 0");
  if (checkpoint_dir.empty()) throw std::invalid_argument("checkpoint_dir is empty");
  generator.validate();
  backend.validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate},
          {"weight_decay", weight_decay},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"max_steps", max_steps},
          {"seed", seed},
          {"deterministic", deterministic},
          {"cosine_decay", cosine_decay},
          {"grad_clip_norm", grad_clip_norm},
          {"val_fraction", val_fraction},
          {"check_frozen_every_step", check_frozen_every_step},
          {"checkpoint_every_steps", checkpoint_every_steps},
          {"augmentation", augmentation},
          {"generator", generator.to_json()},
          {"backend", backend.to_json()},
          {"dataset", dataset.to_json()},
          {"checkpoint_dir", checkpoint_dir},
          {"surrogate", surrogate.to_json()},
          {"generator_checkpoint", generator_checkpoint}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, const TrainConfig& base) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  check_known_keys(j, base.to_json(), "");
  TrainConfig c = base;
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("learning_rate", c.learning_rate);
  read("weight_decay", c.weight_decay);
  read("batch_size", c.batch_size);
  read("max_epochs", c.max_epochs);
  read("max_steps", c.max_steps);
  read("seed", c.seed);
  read("deterministic", c.deterministic);
  read("cosine_decay", c.cosine_decay);
  read("grad_clip_norm", c.grad_clip_norm);
  read("val_fraction", c.val_fraction);
  read("check_frozen_every_step", c.check_frozen_every_step);
  read("checkpoint_every_steps", c.checkpoint_every_steps);
  read("augmentation", c.augmentation);
  read("checkpoint_dir", c.checkpoint_dir);
  read("generator_checkpoint", c.generator_checkpoint);
  // Nested sections overlay their own defaults.
  auto merged = [](const nlohmann::json& current, const nlohmann::json& patch) {
    nlohmann::json out = current;
    out.merge_patch(patch);
    return out;
  };
  if (j.contains("generator")) {
    auto patch = j.at("generator");
    nlohmann::json current = c.generator.to_json();
    // Switching backbone starts from that backbone's preset.
    if (patch.contains("backbone") && patch.at("backbone") != current.at("backbone")) {
      current = GeneratorConfig::from_json({{"backbone", patch.at("backbone")}}).to_json();
    }
    c.generator = GeneratorConfig::from_json(merged(current, patch));
  }
  if (j.contains("backend")) {
    auto patch = j.at("backend");
    nlohmann::json current = c.backend.to_json();
    // Switching backend kind starts from that kind's defaults.
    if (patch.contains("kind") && patch.at("kind") != current.at("kind")) {
      current = BackendConfig::from_json({{"kind", patch.at("kind")}}).to_json();
    }
    c.backend = BackendConfig::from_json(merged(current, patch));
  }
  if (j.contains("dataset")) {
    auto patch = j.at("dataset");
    nlohmann::json current = c.dataset.to_json();
    if (patch.contains("name") && patch.at("name") != current.at("name")) {
      current = DatasetSpec::from_json({{"name", patch.at("name")},
                                        {"split", patch.value("split", std::string("train"))}})
                    .to_json();
    }
    c.dataset = DatasetSpec::from_json(merged(current, patch));
  }
  if (j.contains("surrogate")) {
    c.surrogate = SurrogateConfig::from_json(merged(c.surrogate.to_json(), j.at("surrogate")));
  }
  return c;
}

TrainConfig load_train_config(const std::string& path, const TrainConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config '" + path + "': " + e.what());
  }
  return TrainConfig::from_json(j, base);
}

std::string resolve_data_root(const std::string& root) {
  const char* env = std::getenv(kDataRootEnv);
  if (env == nullptr || *env == '\0' || root.empty() || std::filesystem::path(root).is_absolute()) {
    return root;
  }
  return (std::filesystem::path(env) / root).string();
}

}  // namespace promptseg
