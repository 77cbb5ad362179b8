// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Overlap metrics on binary masks and the structure/alignment metrics used by
// the video polyp benchmarks. All values lie in [0, 1].
//
// Conventions: Dice, IoU and sensitivity are 1 when both masks (or the GT,
// for sensitivity) are empty; F_beta is 0 when precision and recall are both 0.

#pragma once

#include "promptseg/metrics/raster.hpp"

namespace promptseg {

inline constexpr double kBetaSqF = 0.3;
inline constexpr double kBetaSqWeightedF = 1.0;
inline constexpr double kStructureAlpha = 0.5;

double dice_score(const BinaryMap& pred, const BinaryMap& gt);
double iou_score(const BinaryMap& pred, const BinaryMap& gt);
double sensitivity(const BinaryMap& pred, const BinaryMap& gt);
double precision(const BinaryMap& pred, const BinaryMap& gt);
double f_beta(const BinaryMap& pred, const BinaryMap& gt, double beta_sq = kBetaSqF);

/// Weighted F-measure: errors are spread by a 7x7 Gaussian (sigma 5) over the
/// nearest GT pixel and weighted up with distance from the object. An empty
/// GT scores 1 for an all-zero prediction and 0 otherwise.
double weighted_f_beta(const ProbMap& pred, const BinaryMap& gt,
                       double beta_sq = kBetaSqWeightedF);

/// Structure measure alpha * S_object + (1 - alpha) * S_region.
double s_measure(const ProbMap& pred, const BinaryMap& gt, double alpha = kStructureAlpha);

/// Enhanced-alignment score of one binary prediction, averaged over W * H.
double enhanced_alignment(const BinaryMap& pred, const BinaryMap& gt);

/// Mean of enhanced_alignment over the 256 binarizations p > t / 256,
/// t = 0..255.
double e_measure(const ProbMap& pred, const BinaryMap& gt);

}  // namespace promptseg
