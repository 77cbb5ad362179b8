// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-sample metric rows and their unweighted means.

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptseg/metrics/metrics.hpp"

namespace promptseg {

struct MetricConfig {
  double beta_sq_f = kBetaSqF;
  double beta_sq_fw = kBetaSqWeightedF;
  double alpha = kStructureAlpha;
  double threshold = 0.5;

  nlohmann::json to_json() const;
  static MetricConfig from_json(const nlohmann::json& j);
};

struct SampleMetrics {
  std::string sample_id;
  double dice = 0.0;
  double iou = 0.0;
  double sen = 0.0;
  double f_beta = 0.0;
  double f_beta_w = 0.0;
  double s_alpha = 0.0;
  double e_phi_mn = 0.0;
};

struct EvalItem {
  std::string sample_id;
  ProbMap prediction;  // foreground probability
  BinaryMap ground_truth;
};

struct MetricReport {
  std::vector<SampleMetrics> per_sample;  // sorted by sample_id
  SampleMetrics aggregate;                // sample_id "mean"
  MetricConfig config;

  /// Header "sample_id,dice,iou,sen,f_beta,f_beta_w,s_alpha,e_phi_mn", one
  /// row per sample, then the "mean" row.
  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
  /// Writes <stem>.csv and <stem>.json.
  void save(const std::filesystem::path& stem) const;
  static MetricReport from_json(const nlohmann::json& j);
  /// Reads a report written by save() (the .json file).
  static MetricReport load(const std::filesystem::path& json_path);
};

/// One row per named report: "name,samples,dice,...,e_phi_mn" with the
/// aggregate values.
void write_summary_csv(std::ostream& os,
                       const std::vector<std::pair<std::string, MetricReport>>& reports);

/// Overlap metrics use the prediction binarized at config.threshold; the
/// structure and alignment metrics use the probabilities.
SampleMetrics evaluate_sample(const EvalItem& item, const MetricConfig& config = {});

/// Evaluates every item on up to `threads` workers (0 = hardware
/// concurrency). Output order and values do not depend on the thread count.
MetricReport evaluate_dataset(const std::vector<EvalItem>& items, const MetricConfig& config = {},
                              unsigned threads = 0);

}  // namespace promptseg
