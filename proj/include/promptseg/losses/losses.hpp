// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Segmentation objective: mean binary cross-entropy plus soft Dice loss, both
// on logits. Tensor overloads accept [H, W] (one sample) or [B, ...] batches;
// BCE averages over every pixel, Dice is computed per sample and averaged.

#pragma once

#include <torch/types.h>

#include "promptseg/core/types.hpp"

namespace promptseg {

/// Probabilities are clamped to [eps, 1 - eps] inside the logarithms.
inline constexpr double kBceEpsilon = 1e-7;

struct LossValue {
  torch::Tensor total;  // bce + dice, differentiable
  torch::Tensor bce;
  torch::Tensor dice;

  double total_value() const { return total.item<double>(); }
  double bce_value() const { return bce.item<double>(); }
  double dice_value() const { return dice.item<double>(); }
};

torch::Tensor bce_loss(const torch::Tensor& logits, const torch::Tensor& target);
torch::Tensor dice_loss(const torch::Tensor& logits, const torch::Tensor& target);
LossValue seg_loss(const torch::Tensor& logits, const torch::Tensor& target);

double bce_loss(const LogitMap& pred, const Mask& target);
double dice_loss(const LogitMap& pred, const Mask& target);
LossValue seg_loss(const LogitMap& pred, const Mask& target);

}  // namespace promptseg
