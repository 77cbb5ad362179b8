// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Inference and evaluation on top of trained checkpoints. Predictions are
// made in eval mode without gradients, mapped back to the ground-truth (or
// original image) resolution, and scored with the metric suite.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "promptseg/data/dataset.hpp"
#include "promptseg/metrics/report.hpp"
#include "promptseg/prompt_generator/prompt_generator.hpp"
#include "promptseg/segmenter/backend.hpp"
#include "promptseg/surrogate/surrogate_decoder.hpp"

namespace promptseg {

/// [H, W] probabilities to a metric raster.
ProbMap to_prob_map(const torch::Tensor& probabilities);
BinaryMap to_binary_map(const Mask& mask);

/// Foreground probabilities [H, W] of g + backend for one image.
torch::Tensor predict_probabilities(PromptGeneratorImpl& g, SegmenterBackend& backend,
                                    const Image& image, int64_t height, int64_t width);

/// Runs g + backend on every sample and scores the predictions.
MetricReport evaluate(PromptGeneratorImpl& g, SegmenterBackend& backend, const Dataset& data,
                      const MetricConfig& config = {}, unsigned threads = 0);

/// Same for h(g(I)).
MetricReport evaluate_surrogate(SurrogateDecoderImpl& h, PromptGeneratorImpl& g,
                                const Dataset& data, const MetricConfig& config = {},
                                unsigned threads = 0);

/// Same for the backend's own prompt encoder fed a point or the GT mask.
MetricReport evaluate_baseline(SegmenterBackend& backend, BaselinePrompt kind, const Dataset& data,
                               const MetricConfig& config = {}, unsigned threads = 0);

struct InferOptions {
  /// Resize applied before the network (the training resolution); the
  /// output is mapped back to the original image size.
  std::optional<Size2> input_size;
  bool save_probabilities = false;
  double threshold = kDefaultThreshold;
};

struct InferResult {
  std::vector<std::string> written;                          // mask files
  std::vector<std::pair<std::string, std::string>> errors;   // (input, message)
};

/// Writes <out_dir>/<stem>_mask.png (and <stem>_prob.png) per input image.
/// A file that fails to load or predict is reported in `errors` and the run
/// continues.
InferResult infer(PromptGeneratorImpl& g, SegmenterBackend& backend,
                  const std::vector<std::string>& image_paths,
                  const std::filesystem::path& out_dir, const InferOptions& options = {});

}  // namespace promptseg
