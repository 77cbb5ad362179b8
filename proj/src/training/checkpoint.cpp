// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/training/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>

#include <torch/serialize.h>
#include <torch/torch.h>

#include "promptseg/core/errors.hpp"

namespace promptseg {

namespace fs = std::filesystem;

namespace {

c10::impl::GenericDict make_dict() {
  return c10::impl::GenericDict(c10::StringType::get(), c10::AnyType::get());
}

c10::Dict<std::string, torch::Tensor> to_dict(const NamedTensors& tensors) {
  c10::Dict<std::string, torch::Tensor> d;
  for (const auto& [name, t] : tensors) d.insert(name, t.detach().contiguous().clone());
  return d;
}

NamedTensors from_dict(const c10::IValue& v) {
  NamedTensors out;
  for (const auto& item : v.toGenericDict()) {
    out.emplace_back(item.key().toStringRef(), item.value().toTensor());
  }
  return out;
}

const c10::IValue& field(const c10::impl::GenericDict& d, const std::string& key,
                         const std::string& path) {
  auto it = d.find(key);
  if (it == d.end()) throw std::runtime_error("checkpoint '" + path + "' lacks '" + key + "'");
  return it->value();
}

void copy_into(const NamedTensors& src, torch::OrderedDict<std::string, torch::Tensor> dst,
               const char* what) {
  std::map<std::string, torch::Tensor> by_name(src.begin(), src.end());
  if (by_name.size() != dst.size()) {
    throw std::runtime_error(std::string("checkpoint ") + what + " count " +
                             std::to_string(by_name.size()) + " does not match model count " +
                             std::to_string(dst.size()));
  }
  torch::NoGradGuard no_grad;
  for (auto& item : dst) {
    auto it = by_name.find(item.key());
    if (it == by_name.end()) {
      throw std::runtime_error(std::string("checkpoint lacks ") + what + " '" + item.key() + "'");
    }
    if (it->second.sizes() != item.value().sizes()) {
      throw ShapeError::mismatch(std::string("checkpoint ") + what + " '" + item.key() + "'",
                                 item.value().sizes().vec(), it->second.sizes().vec());
    }
    item.value().copy_(it->second);
  }
}

}  // namespace

std::string to_string(CheckpointKind k) {
  return k == CheckpointKind::kGenerator ? "generator" : "surrogate";
}

Checkpoint capture_module(const torch::nn::Module& module, CheckpointKind kind,
                          nlohmann::json config) {
  Checkpoint c;
  c.kind = kind;
  c.config = std::move(config);
  for (const auto& p : module.named_parameters(true)) {
    c.parameters.emplace_back(p.key(), p.value().detach().clone());
  }
  for (const auto& b : module.named_buffers(true)) {
    c.buffers.emplace_back(b.key(), b.value().detach().clone());
  }
  return c;
}

void restore_module(torch::nn::Module& module, const Checkpoint& checkpoint) {
  copy_into(checkpoint.parameters, module.named_parameters(true), "parameter");
  copy_into(checkpoint.buffers, module.named_buffers(true), "buffer");
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  auto d = make_dict();
  d.insert("format_version", c.format_version);
  d.insert("kind", to_string(c.kind));
  d.insert("config", c.config.dump());
  d.insert("params", to_dict(c.parameters));
  d.insert("buffers", to_dict(c.buffers));
  d.insert("generator_digest", c.generator_digest);
  if (c.state) {
    auto s = make_dict();
    s.insert("epoch", c.state->epoch);
    s.insert("global_step", c.state->global_step);
    s.insert("next_batch", c.state->next_batch);
    s.insert("best_val_dice", c.state->best_val_dice);
    s.insert("epoch_sums", c10::List<double>({c.state->epoch_loss_sum, c.state->epoch_bce_sum,
                                              c.state->epoch_dice_loss_sum,
                                              c.state->epoch_dice_sum}));
    s.insert("epoch_samples", c.state->epoch_samples);
    s.insert("torch_rng_state", c.state->torch_rng_state.defined()
                                    ? c10::IValue(c.state->torch_rng_state.clone())
                                    : c10::IValue());
    s.insert("optimizer_state", c.state->optimizer_state);
    d.insert("train_state", s);
  }
  const auto bytes = torch::pickle_save(d);

  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingWeightsError("cannot open checkpoint '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  c10::IValue root;
  try {
    root = torch::pickle_load(bytes);
  } catch (const c10::Error& e) {
    throw std::runtime_error("checkpoint '" + path + "' is not readable: " +
                             e.what_without_backtrace());
  }
  if (!root.isGenericDict()) throw std::runtime_error("checkpoint '" + path + "' is not a dict");
  const auto d = root.toGenericDict();

  Checkpoint c;
  c.format_version = field(d, "format_version", path).toInt();
  if (c.format_version != kCheckpointFormatVersion) {
    throw std::runtime_error("checkpoint '" + path + "' has format version " +
                             std::to_string(c.format_version) + ", expected " +
                             std::to_string(kCheckpointFormatVersion));
  }
  const auto kind = field(d, "kind", path).toStringRef();
  if (kind == "generator") {
    c.kind = CheckpointKind::kGenerator;
  } else if (kind == "surrogate") {
    c.kind = CheckpointKind::kSurrogate;
  } else {
    throw std::runtime_error("checkpoint '" + path + "' has unknown kind '" + kind + "'");
  }
  c.config = nlohmann::json::parse(field(d, "config", path).toStringRef());
  c.parameters = from_dict(field(d, "params", path));
  c.buffers = from_dict(field(d, "buffers", path));
  c.generator_digest = field(d, "generator_digest", path).toStringRef();
  if (auto it = d.find("train_state"); it != d.end()) {
    const auto s = it->value().toGenericDict();
    TrainState t;
    t.epoch = field(s, "epoch", path).toInt();
    t.global_step = field(s, "global_step", path).toInt();
    t.next_batch = field(s, "next_batch", path).toInt();
    t.best_val_dice = field(s, "best_val_dice", path).toDouble();
    const auto sums = field(s, "epoch_sums", path).toDoubleVector();
    if (sums.size() != 4) throw std::runtime_error("checkpoint '" + path + "': bad epoch_sums");
    t.epoch_loss_sum = sums[0];
    t.epoch_bce_sum = sums[1];
    t.epoch_dice_loss_sum = sums[2];
    t.epoch_dice_sum = sums[3];
    t.epoch_samples = field(s, "epoch_samples", path).toInt();
    const auto& rng = field(s, "torch_rng_state", path);
    if (rng.isTensor()) t.torch_rng_state = rng.toTensor();
    t.optimizer_state = field(s, "optimizer_state", path).toStringRef();
    c.state = std::move(t);
  }
  return c;
}

PromptGenerator load_generator(const std::string& path) {
  const auto c = load_checkpoint(path);
  if (c.kind != CheckpointKind::kGenerator) {
    throw std::runtime_error("checkpoint '" + path + "' holds a " + to_string(c.kind) +
                             ", not a prompt generator");
  }
  auto config = GeneratorConfig::from_json(c.config.at("model"));
  config.pretrained_backbone = false;  // weights come from the checkpoint
  PromptGenerator g(config);
  restore_module(*g, c);
  return g;
}

SurrogateDecoder load_surrogate(const std::string& path) {
  const auto c = load_checkpoint(path);
  if (c.kind != CheckpointKind::kSurrogate) {
    throw std::runtime_error("checkpoint '" + path + "' holds a " + to_string(c.kind) +
                             ", not a surrogate decoder");
  }
  SurrogateDecoder h(SurrogateConfig::from_json(c.config.at("model")));
  restore_module(*h, c);
  return h;
}

}  // namespace promptseg
