// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <ATen/CPUGeneratorImpl.h>
#include <c10/util/Logging.h>
#include <torch/torch.h>

#include "promptseg/core/errors.hpp"
#include "promptseg/core/random.hpp"

namespace promptseg {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kHoldoutStream = 0x686f6c646f7574ULL;

std::string augmentation_name(const TrainConfig& config) {
  return config.augmentation == "auto" ? to_string(config.dataset.name) : config.augmentation;
}

torch::Tensor rng_state() {
  auto gen = at::detail::getDefaultCPUGenerator();
  std::lock_guard<std::mutex> lock(gen.mutex());
  return gen.get_state();
}

void set_rng_state(const torch::Tensor& state) {
  auto gen = at::detail::getDefaultCPUGenerator();
  std::lock_guard<std::mutex> lock(gen.mutex());
  gen.set_state(state);
}

void write_log_header(std::ostream& os) {
  os << "epoch,global_step,lr,train_loss,train_bce,train_dice_loss,train_dice,val_dice,seconds\n";
}

void write_log_row(std::ostream& os, const EpochRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%lld,%lld,%.10g,%.10f,%.10f,%.10f,%.10f,%.10f,%.3f\n",
                static_cast<long long>(r.epoch), static_cast<long long>(r.global_step),
                r.learning_rate, r.train_loss, r.train_bce, r.train_dice_loss, r.train_dice,
                r.val_dice, r.seconds);
  os << buf;
}

}  // namespace

std::pair<Dataset, Dataset> holdout_split(const Dataset& data, double fraction, uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw std::invalid_argument("holdout fraction must lie in [0, 1)");
  }
  if (fraction == 0.0) return {data, data};
  const size_t n = data.size();
  const auto n_val =
      std::max<size_t>(1, static_cast<size_t>(std::llround(static_cast<double>(n) * fraction)));
  if (n_val >= n) {
    throw std::invalid_argument("holdout of " + std::to_string(n_val) + " leaves no training sample out of " +
                                std::to_string(n));
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(mix_seed(seed, kHoldoutStream));
  portable_shuffle(order, rng);
  std::vector<size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {data.subset(train), data.subset(val)};
}

std::pair<torch::Tensor, torch::Tensor> collate(const std::vector<SampleRecord>& batch) {
  if (batch.empty()) throw std::invalid_argument("collate: empty batch");
  std::vector<torch::Tensor> images;
  std::vector<torch::Tensor> masks;
  const auto h = batch.front().image.height();
  const auto w = batch.front().image.width();
  for (const auto& s : batch) {
    if (s.image.height() != h || s.image.width() != w) {
      throw ShapeError::mismatch("collate: sample '" + s.source_path +
                                     "' differs in size from the batch; set dataset.resize",
                                 {3, h, w}, s.image.pixels().sizes().vec());
    }
    images.push_back(s.image.pixels().to(torch::kFloat32));
    masks.push_back(s.mask.pixels().to(torch::kFloat32).unsqueeze(0));
  }
  return {torch::stack(images), torch::stack(masks)};
}

double batch_dice(const torch::Tensor& logits, const torch::Tensor& masks) {
  const auto b = logits.size(0);
  auto pred = binarize_logits(logits.detach()).to(torch::kFloat64).reshape({b, -1});
  auto gt = masks.detach().to(torch::kFloat64).reshape({b, -1});
  auto inter = (pred * gt).sum(1);
  auto total = pred.sum(1) + gt.sum(1);
  auto dice = torch::where(total > 0, 2.0 * inter / total.clamp_min(1.0), torch::ones_like(total));
  return dice.mean().item<double>();
}

void enable_determinism(uint64_t seed) {
  torch::manual_seed(seed);
  at::set_num_threads(1);
  at::globalContext().setDeterministicAlgorithms(true, false);
}

TrainerBase::TrainerBase(TrainConfig config, CheckpointKind kind)
    : config_(std::move(config)), kind_(kind) {
  config_.validate();
  if (config_.deterministic) enable_determinism(config_.seed);
  augment_ = make_augmenter(augmentation_name(config_));
}

void TrainerBase::initialize() {
  std::vector<torch::Tensor> params;
  for (auto& p : trainable().parameters()) {
    if (p.requires_grad()) params.push_back(p);
  }
  if (params.empty()) throw std::logic_error("trainer: the trainable network has no parameters");
  optimizer_ = std::make_unique<torch::optim::Adam>(
      params, torch::optim::AdamOptions(config_.learning_rate).weight_decay(config_.weight_decay));
  frozen_at_start_ = frozen_snapshots();
}

double TrainerBase::current_learning_rate(int64_t total_steps) const {
  if (!config_.cosine_decay || total_steps <= 0) return config_.learning_rate;
  const double t = std::min<double>(static_cast<double>(state_.global_step),
                                    static_cast<double>(total_steps));
  return config_.learning_rate * 0.5 *
         (1.0 + std::cos(std::numbers::pi * t / static_cast<double>(total_steps)));
}

StepResult TrainerBase::train_step(const torch::Tensor& images, const torch::Tensor& masks) {
  if (masks.dim() != 4 || masks.size(1) != 1 || masks.size(0) != images.size(0)) {
    throw ShapeError::mismatch("train_step masks", {images.size(0), 1, images.size(2), images.size(3)},
                               masks.sizes().vec());
  }
  auto& net = trainable();
  net.train();
  optimizer_->zero_grad();
  auto logits = predict(images, masks.size(2), masks.size(3));
  auto loss = seg_loss(logits, masks.to(logits.scalar_type()));

  StepResult r;
  r.loss = loss.total_value();
  if (!std::isfinite(r.loss)) {
    throw NonFiniteError("non-finite loss " + std::to_string(r.loss) + " at epoch " +
                         std::to_string(state_.epoch) + ", step " +
                         std::to_string(state_.global_step) + " (bce " +
                         std::to_string(loss.bce_value()) + ", dice " +
                         std::to_string(loss.dice_value()) + ")");
  }
  r.bce = loss.bce_value();
  r.dice_loss = loss.dice_value();
  r.dice = batch_dice(logits, masks);

  loss.total.backward();
  if (config_.grad_clip_norm > 0.0) {
    torch::nn::utils::clip_grad_norm_(net.parameters(), config_.grad_clip_norm);
  }
  const double lr = current_learning_rate(planned_steps_);
  for (auto& group : optimizer_->param_groups()) {
    static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  }
  optimizer_->step();
  ++state_.global_step;

  if (config_.check_frozen_every_step) check_frozen();
  if (step_callback_) step_callback_(state_.global_step, r);
  return r;
}

StepResult TrainerBase::train_step(const std::vector<SampleRecord>& batch) {
  const auto [images, masks] = collate(batch);
  return train_step(images, masks);
}

double TrainerBase::validate(const Dataset& data) {
  if (data.empty()) return 0.0;
  auto& net = trainable();
  net.eval();
  torch::NoGradGuard no_grad;
  double sum = 0.0;
  std::vector<SampleRecord> chunk;
  auto flush = [&] {
    if (chunk.empty()) return;
    const auto [images, masks] = collate(chunk);
    auto logits = predict(images, masks.size(2), masks.size(3));
    sum += batch_dice(logits, masks) * static_cast<double>(chunk.size());
    chunk.clear();
  };
  for (size_t i = 0; i < data.size(); ++i) {
    auto s = data.get(i);
    if (!chunk.empty() && (static_cast<int64_t>(chunk.size()) >= config_.batch_size ||
                           s.image.height() != chunk.front().image.height() ||
                           s.image.width() != chunk.front().image.width())) {
      flush();
    }
    chunk.push_back(std::move(s));
  }
  flush();
  net.train();
  return sum / static_cast<double>(data.size());
}

void TrainerBase::check_frozen() const {
  const auto now = frozen_snapshots();
  for (size_t i = 0; i < now.size(); ++i) {
    if (!(now[i].second == frozen_at_start_.at(i).second)) {
      throw FrozenInvariantViolation("frozen module '" + now[i].first + "' changed: digest " +
                                     frozen_at_start_[i].second.global_checksum + " -> " +
                                     now[i].second.global_checksum + " at step " +
                                     std::to_string(state_.global_step));
    }
  }
}

void TrainerBase::check_writable() const {
  const fs::path dir(config_.checkpoint_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (ec || !out || !(out << "ok")) {
      throw std::runtime_error("checkpoint directory '" + dir.string() + "' is not writable");
    }
  }
  fs::remove(probe, ec);
}

Checkpoint TrainerBase::make_checkpoint(bool with_state) const {
  auto c = capture_module(trainable_const(), kind_,
                          {{"model", model_config()}, {"train", config_.to_json()}});
  if (with_state) {
    TrainState s = state_;
    s.torch_rng_state = rng_state();
    torch::serialize::OutputArchive archive;
    optimizer_->save(archive);
    std::ostringstream os;
    archive.save_to(os);
    s.optimizer_state = os.str();
    c.state = std::move(s);
  }
  decorate_checkpoint(c);
  return c;
}

void TrainerBase::save(const fs::path& path, bool with_state) const {
  save_checkpoint(path.string(), make_checkpoint(with_state));
}

void TrainerBase::resume(const std::string& checkpoint_path) {
  const auto c = load_checkpoint(checkpoint_path);
  if (c.kind != kind_) {
    throw std::runtime_error("cannot resume a " + to_string(kind_) + " run from a " +
                             to_string(c.kind) + " checkpoint '" + checkpoint_path + "'");
  }
  if (!c.state) {
    throw std::runtime_error("checkpoint '" + checkpoint_path + "' holds no training state");
  }
  check_resumable(c);
  restore_module(trainable(), c);
  state_ = *c.state;
  torch::serialize::InputArchive archive;
  std::istringstream is(state_.optimizer_state);
  archive.load_from(is);
  optimizer_->load(archive);
  if (state_.torch_rng_state.defined()) set_rng_state(state_.torch_rng_state);
}

FitResult TrainerBase::fit(const Dataset& train, const Dataset& validation) {
  check_writable();
  if (train.empty()) throw std::invalid_argument("fit: empty training set");

  const fs::path dir(config_.checkpoint_dir);
  FitResult result;
  result.last_checkpoint = dir / "last.ckpt";
  result.best_checkpoint = dir / "best.ckpt";
  result.final_checkpoint = dir / "final.ckpt";
  result.log_path = dir / "train_log.csv";

  const bool fresh = state_.global_step == 0 && state_.epoch == 0 && state_.next_batch == 0;
  std::ofstream log;
  if (fresh || !fs::exists(result.log_path)) {
    log.open(result.log_path, std::ios::trunc);
    write_log_header(log);
  } else {
    log.open(result.log_path, std::ios::app);
  }
  if (!log) throw std::runtime_error("cannot write '" + result.log_path.string() + "'");

  check_frozen();

  const auto n = static_cast<int64_t>(train.size());
  const int64_t per_epoch = (n + config_.batch_size - 1) / config_.batch_size;
  planned_steps_ = config_.max_steps > 0 ? config_.max_steps : config_.max_epochs * per_epoch;

  using Clock = std::chrono::steady_clock;
  while (state_.epoch < config_.max_epochs) {
    const auto started = Clock::now();
    std::vector<size_t> order(train.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 order_rng(mix_seed(config_.seed, static_cast<uint64_t>(state_.epoch)));
    portable_shuffle(order, order_rng);

    for (int64_t b = state_.next_batch; b < per_epoch; ++b) {
      if (config_.max_steps > 0 && state_.global_step >= config_.max_steps) {
        result.stopped_by_step_limit = true;
        save(result.last_checkpoint, true);
        save(result.final_checkpoint, false);
        result.state = state_;
        return result;
      }
      std::vector<SampleRecord> batch;
      const int64_t end = std::min(n, (b + 1) * config_.batch_size);
      for (int64_t k = b * config_.batch_size; k < end; ++k) {
        const size_t index = order[static_cast<size_t>(k)];
        std::mt19937_64 rng(
            mix_seed(config_.seed, static_cast<uint64_t>(state_.epoch), static_cast<uint64_t>(index)));
        batch.push_back(augment_.apply(train.get(index), rng));
      }
      const auto r = train_step(batch);
      const auto size = static_cast<double>(batch.size());
      state_.epoch_loss_sum += r.loss * size;
      state_.epoch_bce_sum += r.bce * size;
      state_.epoch_dice_loss_sum += r.dice_loss * size;
      state_.epoch_dice_sum += r.dice * size;
      state_.epoch_samples += static_cast<int64_t>(batch.size());
      state_.next_batch = b + 1;
      if (config_.checkpoint_every_steps > 0 &&
          state_.global_step % config_.checkpoint_every_steps == 0) {
        save(result.last_checkpoint, true);
      }
    }

    check_frozen();
    EpochRecord rec;
    rec.epoch = state_.epoch;
    rec.global_step = state_.global_step;
    rec.learning_rate = current_learning_rate(planned_steps_);
    const double samples = static_cast<double>(std::max<int64_t>(1, state_.epoch_samples));
    rec.train_loss = state_.epoch_loss_sum / samples;
    rec.train_bce = state_.epoch_bce_sum / samples;
    rec.train_dice_loss = state_.epoch_dice_loss_sum / samples;
    rec.train_dice = state_.epoch_dice_sum / samples;
    rec.val_dice = validate(validation);
    rec.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    write_log_row(log, rec);
    log.flush();
    result.epochs.push_back(rec);

    state_.epoch += 1;
    state_.next_batch = 0;
    state_.epoch_loss_sum = state_.epoch_bce_sum = 0.0;
    state_.epoch_dice_loss_sum = state_.epoch_dice_sum = 0.0;
    state_.epoch_samples = 0;
    if (rec.val_dice > state_.best_val_dice) {
      state_.best_val_dice = rec.val_dice;
      save(result.best_checkpoint, false);
    }
    save(result.last_checkpoint, true);
  }
  save(result.final_checkpoint, false);
  result.state = state_;
  return result;
}

GeneratorTrainer::GeneratorTrainer(TrainConfig config, PromptGenerator generator,
                                   std::shared_ptr<SegmenterBackend> backend)
    : TrainerBase(std::move(config), CheckpointKind::kGenerator),
      g_(std::move(generator)),
      backend_(std::move(backend)) {
  if (!g_ || !backend_) throw std::invalid_argument("GeneratorTrainer: null generator or backend");
  initialize();
}

GeneratorTrainer::GeneratorTrainer(TrainConfig config)
    : GeneratorTrainer(config, build_prompt_generator(config.generator),
                       std::shared_ptr<SegmenterBackend>(make_backend(config.backend))) {}

torch::Tensor GeneratorTrainer::predict(const torch::Tensor& images, int64_t height,
                                        int64_t width) {
  return forward_batch(*backend_, *g_, images).at_resolution(height, width);
}

std::vector<std::pair<std::string, ParameterSnapshot>> GeneratorTrainer::frozen_snapshots() const {
  return {{"segmenter backend", backend_->snapshot()}};
}

FitResult train_generator(const TrainConfig& config, const std::string& resume_from) {
  auto spec = config.dataset;
  spec.root_dir = resolve_data_root(spec.root_dir);
  const auto data = open_dataset(spec);
  for (const auto& w : data.warnings) LOG(WARNING) << w;
  const auto [train, val] = holdout_split(data, config.val_fraction, config.seed);
  GeneratorTrainer trainer(config);
  if (!resume_from.empty()) trainer.resume(resume_from);
  return trainer.fit(train, val);
}

}  // namespace promptseg
