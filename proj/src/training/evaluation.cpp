// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/training/evaluation.hpp"

#include <exception>

#include <torch/torch.h>

#include "promptseg/core/errors.hpp"
#include "promptseg/data/image_io.hpp"
#include "promptseg/training/surrogate_trainer.hpp"

namespace promptseg {

namespace fs = std::filesystem;

namespace {

/// Puts `module` in eval mode for the guard's lifetime.
class EvalModeGuard {
 public:
  explicit EvalModeGuard(torch::nn::Module& m) : module_(m), was_training_(m.is_training()) {
    module_.eval();
  }
  ~EvalModeGuard() { module_.train(was_training_); }
  EvalModeGuard(const EvalModeGuard&) = delete;
  EvalModeGuard& operator=(const EvalModeGuard&) = delete;

 private:
  torch::nn::Module& module_;
  bool was_training_;
};

template <typename Predict>
MetricReport score(const Dataset& data, const MetricConfig& config, unsigned threads,
                   Predict predict) {
  std::vector<EvalItem> items;
  items.reserve(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    const auto sample = data.get(i);
    const auto probs = predict(sample);
    items.push_back({data.sample_id(i), to_prob_map(probs), to_binary_map(sample.mask)});
  }
  return evaluate_dataset(items, config, threads);
}

torch::Tensor batch_of(const Image& image) {
  return image.pixels().to(torch::kFloat32).unsqueeze(0);
}

}  // namespace

ProbMap to_prob_map(const torch::Tensor& probabilities) {
  if (probabilities.dim() != 2) {
    throw ShapeError::mismatch("probability map", {-1, -1}, probabilities.sizes().vec());
  }
  auto t = probabilities.detach().to(torch::kFloat64).contiguous();
  const auto* p = t.data_ptr<double>();
  return ProbMap(t.size(0), t.size(1), std::vector<double>(p, p + t.numel()));
}

BinaryMap to_binary_map(const Mask& mask) {
  auto t = mask.pixels().contiguous();
  const auto* p = t.data_ptr<uint8_t>();
  return BinaryMap(t.size(0), t.size(1), std::vector<uint8_t>(p, p + t.numel()));
}

torch::Tensor predict_probabilities(PromptGeneratorImpl& g, SegmenterBackend& backend,
                                    const Image& image, int64_t height, int64_t width) {
  EvalModeGuard eval(g);
  torch::NoGradGuard no_grad;
  const auto out = forward_batch(backend, g, batch_of(image));
  return torch::sigmoid(out.at_resolution(height, width))[0][0];
}

MetricReport evaluate(PromptGeneratorImpl& g, SegmenterBackend& backend, const Dataset& data,
                      const MetricConfig& config, unsigned threads) {
  return score(data, config, threads, [&](const SampleRecord& s) {
    return predict_probabilities(g, backend, s.image, s.mask.height(), s.mask.width());
  });
}

MetricReport evaluate_surrogate(SurrogateDecoderImpl& h, PromptGeneratorImpl& g,
                                const Dataset& data, const MetricConfig& config,
                                unsigned threads) {
  EvalModeGuard eval_h(h);
  EvalModeGuard eval_g(g);
  torch::NoGradGuard no_grad;
  return score(data, config, threads, [&](const SampleRecord& s) {
    auto logits = surrogate_predict(h, g, batch_of(s.image), s.mask.height(), s.mask.width());
    return torch::sigmoid(logits)[0][0];
  });
}

MetricReport evaluate_baseline(SegmenterBackend& backend, BaselinePrompt kind, const Dataset& data,
                               const MetricConfig& config, unsigned threads) {
  torch::NoGradGuard no_grad;
  return score(data, config, threads, [&](const SampleRecord& s) {
    const auto out = baseline_prompt_forward(backend, kind, s.image, s.mask);
    return torch::sigmoid(out.at_resolution(s.mask.height(), s.mask.width()))[0][0];
  });
}

InferResult infer(PromptGeneratorImpl& g, SegmenterBackend& backend,
                  const std::vector<std::string>& image_paths, const fs::path& out_dir,
                  const InferOptions& options) {
  InferResult result;
  if (image_paths.empty()) return result;
  fs::create_directories(out_dir);
  for (const auto& path : image_paths) {
    try {
      const auto original = load_image(path);
      const auto input = options.input_size ? resize_image(original, *options.input_size) : original;
      const auto probs =
          predict_probabilities(g, backend, input, original.height(), original.width());
      const auto stem = fs::path(path).stem().string();
      const auto mask_path = out_dir / (stem + "_mask.png");
      save_mask_png(mask_path.string(), Mask((probs >= options.threshold).to(torch::kUInt8)));
      if (options.save_probabilities) {
        save_probability_png((out_dir / (stem + "_prob.png")).string(), probs);
      }
      result.written.push_back(mask_path.string());
    } catch (const std::exception& e) {
      result.errors.emplace_back(path, e.what());
    }
  }
  return result;
}

}  // namespace promptseg
