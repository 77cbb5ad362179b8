// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/losses/losses.hpp"

#include <cmath>

#include <torch/torch.h>

#include "promptseg/core/errors.hpp"

namespace promptseg {

namespace {

// Flattens to [B, N]; an [H, W] map is a batch of one.
std::pair<torch::Tensor, torch::Tensor> flatten_pair(const torch::Tensor& logits,
                                                     const torch::Tensor& target) {
  if (logits.sizes() != target.sizes()) {
    throw ShapeError::mismatch("loss target", logits.sizes().vec(), target.sizes().vec());
  }
  if (logits.dim() < 2) throw ShapeError("loss: expected at least [H, W] logits");
  const int64_t batch = logits.dim() == 2 ? 1 : logits.size(0);
  return {logits.reshape({batch, -1}), target.to(logits.scalar_type()).reshape({batch, -1})};
}

}  // namespace

torch::Tensor bce_loss(const torch::Tensor& logits, const torch::Tensor& target) {
  auto [x, m] = flatten_pair(logits, target);
  const double log_eps = std::log(kBceEpsilon);
  auto log_p = torch::log_sigmoid(x).clamp_min(log_eps);
  auto log_q = torch::log_sigmoid(-x).clamp_min(log_eps);
  return -(m * log_p + (1.0 - m) * log_q).mean();
}

torch::Tensor dice_loss(const torch::Tensor& logits, const torch::Tensor& target) {
  auto [x, m] = flatten_pair(logits, target);
  auto p = torch::sigmoid(x);
  auto tp = (p * m).sum(1);
  auto fp = (p * (1.0 - m)).sum(1);
  auto fn = ((1.0 - p) * m).sum(1);
  auto per_sample = 1.0 - (2.0 * tp + 1.0) / (2.0 * tp + fn + fp + 1.0);
  return per_sample.mean();
}

LossValue seg_loss(const torch::Tensor& logits, const torch::Tensor& target) {
  LossValue v;
  v.bce = bce_loss(logits, target);
  v.dice = dice_loss(logits, target);
  v.total = v.bce + v.dice;
  return v;
}

double bce_loss(const LogitMap& pred, const Mask& target) {
  return bce_loss(pred.values(), target.pixels()).item<double>();
}

double dice_loss(const LogitMap& pred, const Mask& target) {
  return dice_loss(pred.values(), target.pixels()).item<double>();
}

LossValue seg_loss(const LogitMap& pred, const Mask& target) {
  return seg_loss(pred.values(), target.pixels());
}

}  // namespace promptseg
