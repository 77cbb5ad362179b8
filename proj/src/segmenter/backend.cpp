// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/segmenter/backend.hpp"

#include <stdexcept>

#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "promptseg/core/errors.hpp"
#include "promptseg/prompt_generator/prompt_generator.hpp"
#include "promptseg/segmenter/foundation_backend.hpp"
#include "promptseg/segmenter/stub_backend.hpp"

namespace promptseg {

namespace F = torch::nn::functional;

std::string to_string(BackendKind k) {
  switch (k) {
    case BackendKind::kFoundationVitHuge:
      return "foundation-vit-huge";
    case BackendKind::kFrozenStub:
      return "frozen-stub";
  }
  return "unknown";
}

BackendKind backend_kind_from_string(const std::string& s) {
  if (s == "foundation-vit-huge" || s == "foundation") return BackendKind::kFoundationVitHuge;
  if (s == "frozen-stub" || s == "stub") return BackendKind::kFrozenStub;
  throw std::invalid_argument("unknown backend '" + s + "'");
}

BackendConfig BackendConfig::stub(int64_t input_resolution, uint64_t seed) {
  BackendConfig c;
  c.kind = BackendKind::kFrozenStub;
  c.input_resolution = input_resolution;
  c.seed = seed;
  return c;
}

BackendConfig BackendConfig::foundation(std::string weights_path) {
  BackendConfig c;
  c.kind = BackendKind::kFoundationVitHuge;
  c.input_resolution = 1024;
  c.weights_path = std::move(weights_path);
  return c;
}

void BackendConfig::validate() const {
  if (kind == BackendKind::kFrozenStub) {
    if (input_resolution < 64 || input_resolution % 64 != 0) {
      throw std::invalid_argument("stub backend: input_resolution must be a positive multiple of 64");
    }
  } else {
    if (input_resolution <= 0 || input_resolution % 16 != 0) {
      throw std::invalid_argument("foundation backend: input_resolution must be a multiple of 16");
    }
    if (weights_path.empty()) {
      throw MissingWeightsError("foundation backend: weights_path is not set");
    }
  }
  if (!(mask_prompt_logit > 0.0)) throw std::invalid_argument("mask_prompt_logit must be > 0");
}

nlohmann::json BackendConfig::to_json() const {
  return {{"kind", to_string(kind)},
          {"input_resolution", input_resolution},
          {"weights_path", weights_path},
          {"seed", seed},
          {"mask_prompt_logit", mask_prompt_logit}};
}

BackendConfig BackendConfig::from_json(const nlohmann::json& j) {
  const auto kind = backend_kind_from_string(j.value("kind", std::string("frozen-stub")));
  BackendConfig c = kind == BackendKind::kFrozenStub
                        ? stub()
                        : foundation(j.value("weights_path", std::string()));
  c.input_resolution = j.value("input_resolution", c.input_resolution);
  c.weights_path = j.value("weights_path", c.weights_path);
  c.seed = j.value("seed", c.seed);
  c.mask_prompt_logit = j.value("mask_prompt_logit", c.mask_prompt_logit);
  return c;
}

torch::Tensor SegmenterOutput::at_resolution(int64_t height, int64_t width) const {
  auto resize = [](const torch::Tensor& x, int64_t h, int64_t w) {
    if (x.size(2) == h && x.size(3) == w) return x;
    return F::interpolate(x, F::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{h, w})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
  };
  if (valid_height == frame_side && valid_width == frame_side) {
    return resize(logits, height, width);
  }
  auto framed = resize(logits, frame_side, frame_side);
  auto cropped = framed.slice(2, 0, valid_height).slice(3, 0, valid_width);
  return resize(cropped, height, width);
}

LogitMap SegmenterOutput::native(int64_t index) const {
  return LogitMap(logits[index][0].detach());
}

void SegmenterBackend::describe_frame(SegmenterOutput& out, int64_t, int64_t) const {
  out.frame_side = kDecoderNativeSide;
  out.valid_height = kDecoderNativeSide;
  out.valid_width = kDecoderNativeSide;
}

torch::Tensor SegmenterBackend::baseline_decode(const torch::Tensor&, BaselinePrompt,
                                                const Mask&, int64_t, int64_t) {
  throw UnsupportedOperation(to_string(kind()) +
                             " backend has no original prompt encoder; baseline prompts need "
                             "the foundation backend");
}

std::unique_ptr<SegmenterBackend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::kFrozenStub) return std::make_unique<StubBackend>(config);
  return std::make_unique<FoundationBackend>(config);
}

ImageEmbedding encode_image(SegmenterBackend& backend, const Image& image) {
  return ImageEmbedding(backend.encode_images(image.pixels().unsqueeze(0)).squeeze(0));
}

SegmenterOutput decode_mask(SegmenterBackend& backend, const ImageEmbedding& image_emb,
                            const PromptEmbedding& prompt) {
  SegmenterOutput out;
  out.logits = backend.decode_masks(image_emb.values().unsqueeze(0), prompt.values().unsqueeze(0));
  return out;
}

SegmenterOutput forward_batch(SegmenterBackend& backend, PromptGeneratorImpl& g,
                              const torch::Tensor& images) {
  require_image_batch(images);
  SegmenterOutput out;
  auto embeddings = backend.encode_images(images);
  auto prompts = g.forward(images);
  out.logits = backend.decode_masks(embeddings, prompts);
  backend.describe_frame(out, images.size(2), images.size(3));
  return out;
}

SegmenterOutput forward(SegmenterBackend& backend, PromptGeneratorImpl& g, const Image& image) {
  return forward_batch(backend, g, image.pixels().unsqueeze(0));
}

SegmenterOutput baseline_prompt_forward(SegmenterBackend& backend, BaselinePrompt kind,
                                        const Image& image, const Mask& annotation) {
  if (annotation.height() != image.height() || annotation.width() != image.width()) {
    throw ShapeError::mismatch("baseline annotation", {image.height(), image.width()},
                               {annotation.height(), annotation.width()});
  }
  torch::NoGradGuard no_grad;
  SegmenterOutput out;
  auto embeddings = backend.encode_images(image.pixels().unsqueeze(0));
  out.logits =
      backend.baseline_decode(embeddings, kind, annotation, image.height(), image.width());
  backend.describe_frame(out, image.height(), image.width());
  return out;
}

std::pair<int64_t, int64_t> interior_point(const Mask& mask) {
  if (mask.foreground_count() == 0) {
    throw std::invalid_argument("point prompt: mask has no foreground pixel");
  }
  const auto h = static_cast<int>(mask.height());
  const auto w = static_cast<int>(mask.width());
  auto px = mask.pixels().contiguous();
  // One pixel of background border so the image edge counts as boundary.
  cv::Mat padded = cv::Mat::zeros(h + 2, w + 2, CV_8U);
  const auto* src = px.data_ptr<uint8_t>();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) padded.at<uint8_t>(r + 1, c + 1) = src[r * w + c];
  }
  cv::Mat dist;
  cv::distanceTransform(padded, dist, cv::DIST_L2, cv::DIST_MASK_PRECISE);
  float best = -1.0f;
  std::pair<int64_t, int64_t> at{0, 0};
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const float d = dist.at<float>(r + 1, c + 1);
      if (d > best) {
        best = d;
        at = {r, c};
      }
    }
  }
  return at;
}

}  // namespace promptseg
