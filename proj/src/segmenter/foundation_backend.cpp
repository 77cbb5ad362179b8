// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/segmenter/foundation_backend.hpp"

#include <cmath>
#include <filesystem>

#include <torch/torch.h>

#include "promptseg/core/errors.hpp"

namespace promptseg {

namespace F = torch::nn::functional;
namespace fs = std::filesystem;

namespace {

torch::jit::Module load_module(const fs::path& dir, const std::string& file) {
  const auto path = dir / file;
  if (!fs::exists(path)) {
    throw MissingWeightsError("foundation backend: '" + path.string() + "' not found");
  }
  try {
    auto m = torch::jit::load(path.string(), torch::kCPU);
    m.eval();
    for (auto p : m.parameters()) p.requires_grad_(false);
    return m;
  } catch (const c10::Error& e) {
    throw MissingWeightsError("foundation backend: cannot load '" + path.string() +
                              "': " + e.what_without_backtrace());
  }
}

std::pair<torch::Tensor, torch::Tensor> as_pair(const c10::IValue& v, const char* what) {
  if (!v.isTuple() || v.toTupleRef().elements().size() < 2) {
    throw std::runtime_error(std::string("foundation backend: ") + what +
                             " must return a (tensor, tensor) tuple");
  }
  const auto& e = v.toTupleRef().elements();
  return {e[0].toTensor(), e[1].toTensor()};
}

torch::Tensor resize(const torch::Tensor& x, int64_t h, int64_t w, bool nearest = false) {
  auto opts = F::InterpolateFuncOptions().size(std::vector<int64_t>{h, w});
  if (nearest) {
    opts.mode(torch::kNearest);
  } else {
    opts.mode(torch::kBilinear).align_corners(false);
  }
  return F::interpolate(x, opts);
}

}  // namespace

FoundationBackend::FoundationBackend(const BackendConfig& config)
    : resolution_(config.input_resolution), mask_prompt_logit_(config.mask_prompt_logit) {
  config.validate();
  const fs::path dir(config.weights_path);
  if (!fs::is_directory(dir)) {
    throw MissingWeightsError("foundation backend: weights directory '" + dir.string() +
                              "' does not exist");
  }
  image_encoder_ = load_module(dir, "image_encoder.pt");
  prompt_encoder_ = load_module(dir, "prompt_encoder.pt");
  mask_decoder_ = load_module(dir, "mask_decoder.pt");
}

std::pair<int64_t, int64_t> FoundationBackend::scaled_size(int64_t height, int64_t width) const {
  const double scale = static_cast<double>(resolution_) / static_cast<double>(std::max(height, width));
  return {static_cast<int64_t>(std::lround(height * scale)),
          static_cast<int64_t>(std::lround(width * scale))};
}

torch::Tensor FoundationBackend::preprocess(const torch::Tensor& image) const {
  const auto [h, w] = scaled_size(image.size(1), image.size(2));
  auto x = resize(image.unsqueeze(0).to(torch::kFloat32) * 255.0, h, w);
  auto mean = torch::tensor({123.675, 116.28, 103.53}, x.options()).view({1, 3, 1, 1});
  auto std = torch::tensor({58.395, 57.12, 57.375}, x.options()).view({1, 3, 1, 1});
  x = (x - mean) / std;
  return F::pad(x, F::PadFuncOptions({0, resolution_ - w, 0, resolution_ - h}));
}

torch::Tensor FoundationBackend::encode_images(const torch::Tensor& images) {
  require_image_batch(images);
  require_finite(images, "segmenter input");
  torch::NoGradGuard no_grad;
  std::vector<torch::Tensor> out;
  out.reserve(images.size(0));
  for (int64_t i = 0; i < images.size(0); ++i) {
    out.push_back(image_encoder_.forward({preprocess(images[i])}).toTensor());
  }
  return torch::cat(out, 0);
}

void FoundationBackend::describe_frame(SegmenterOutput& out, int64_t height, int64_t width) const {
  const auto [h, w] = scaled_size(height, width);
  out.frame_side = resolution_;
  out.valid_height = h;
  out.valid_width = w;
}

torch::Tensor FoundationBackend::run_decoder(const torch::Tensor& embedding,
                                             const torch::Tensor& sparse,
                                             const torch::Tensor& dense) {
  auto pe = prompt_encoder_.run_method("dense_pe").toTensor();
  auto result = mask_decoder_.forward({embedding, pe, sparse, dense});
  return as_pair(result, "mask_decoder.forward").first;
}

torch::Tensor FoundationBackend::decode_masks(const torch::Tensor& embeddings,
                                              const torch::Tensor& prompts) {
  require_prompt_batch(prompts);
  if (embeddings.dim() != 4 || embeddings.size(0) != prompts.size(0)) {
    throw ShapeError::mismatch("foundation image embedding",
                               {prompts.size(0), kPromptChannels, kPromptSpatial, kPromptSpatial},
                               embeddings.sizes().vec());
  }
  // The decoder is called per sample: its token/embedding broadcast assumes one image.
  std::vector<torch::Tensor> out;
  for (int64_t i = 0; i < prompts.size(0); ++i) {
    auto none = as_pair(prompt_encoder_.run_method("embed_none", int64_t{1}), "embed_none");
    out.push_back(run_decoder(embeddings.slice(0, i, i + 1), none.first,
                              prompts.slice(0, i, i + 1).to(torch::kFloat32)));
  }
  return torch::cat(out, 0);
}

torch::Tensor FoundationBackend::baseline_decode(const torch::Tensor& embeddings,
                                                 BaselinePrompt kind, const Mask& annotation,
                                                 int64_t image_height, int64_t image_width) {
  torch::NoGradGuard no_grad;
  const auto [h, w] = scaled_size(image_height, image_width);
  std::pair<torch::Tensor, torch::Tensor> prompt;
  if (kind == BaselinePrompt::kPoint) {
    const auto [row, col] = interior_point(annotation);
    const double sy = static_cast<double>(h) / static_cast<double>(image_height);
    const double sx = static_cast<double>(w) / static_cast<double>(image_width);
    auto coords = torch::tensor({static_cast<float>(col * sx), static_cast<float>(row * sy)})
                      .view({1, 1, 2});
    auto labels = torch::ones({1, 1}, torch::kInt64);
    prompt = as_pair(prompt_encoder_.run_method("embed_points", coords, labels), "embed_points");
  } else {
    if (annotation.foreground_count() == 0) {
      throw std::invalid_argument("mask prompt: annotation has no foreground pixel");
    }
    auto m = annotation.pixels().to(torch::kFloat32).view({1, 1, image_height, image_width});
    m = resize(m, h, w, true);
    m = F::pad(m, F::PadFuncOptions({0, resolution_ - w, 0, resolution_ - h}));
    const int64_t low = resolution_ / 4;
    m = resize(m, low, low, true);
    auto logits = (m * 2.0 - 1.0) * mask_prompt_logit_;
    prompt = as_pair(prompt_encoder_.run_method("embed_mask", logits), "embed_mask");
  }
  return run_decoder(embeddings, prompt.first, prompt.second);
}

ParameterSnapshot FoundationBackend::snapshot() const {
  NamedTensors all;
  auto collect = [&all](const torch::jit::Module& m, const std::string& prefix) {
    for (const auto& p : m.named_parameters(true)) all.emplace_back(prefix + p.name, p.value);
    for (const auto& b : m.named_buffers(true)) {
      all.emplace_back(prefix + "buffer:" + b.name, b.value);
    }
  };
  collect(image_encoder_, "image_encoder.");
  collect(prompt_encoder_, "prompt_encoder.");
  collect(mask_decoder_, "mask_decoder.");
  return snapshot_parameters(all);
}

}  // namespace promptseg
