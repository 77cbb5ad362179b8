// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/data/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include <torch/torch.h>

#include "promptseg/core/random.hpp"

namespace promptseg {

namespace {

struct Ellipse {
  double cx, cy, a, b, cos_t, sin_t;

  // Normalized radius: 1 on the boundary.
  double radius(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double u = (dx * cos_t + dy * sin_t) / a;
    const double v = (-dx * sin_t + dy * cos_t) / b;
    return std::sqrt(u * u + v * v);
  }
};

}  // namespace

SampleRecord synthetic_blob(const SyntheticBlobsConfig& config, int64_t index) {
  if (config.size < kMinImageSide) throw std::invalid_argument("synthetic-blobs: size < 32");
  const int64_t n = config.size;
  std::mt19937_64 rng(mix_seed(config.seed, static_cast<uint64_t>(index)));

  std::array<double, 3> background{}, foreground{};
  for (int c = 0; c < 3; ++c) background[c] = uniform(rng, 0.1, 0.4);
  for (int c = 0; c < 3; ++c) foreground[c] = uniform(rng, 0.55, 0.95);

  std::vector<Ellipse> blobs(1 + uniform_index(rng, 3));
  for (auto& e : blobs) {
    e.cx = uniform(rng, 0.25, 0.75) * n;
    e.cy = uniform(rng, 0.25, 0.75) * n;
    e.a = uniform(rng, 0.1, 0.25) * n;
    e.b = uniform(rng, 0.1, 0.25) * n;
    const double theta = uniform(rng, 0.0, std::numbers::pi);
    e.cos_t = std::cos(theta);
    e.sin_t = std::sin(theta);
  }

  auto image = torch::empty({3, n, n}, torch::kFloat32);
  auto mask = torch::zeros({n, n}, torch::kUInt8);
  auto img = image.accessor<float, 3>();
  auto msk = mask.accessor<uint8_t, 2>();
  for (int64_t r = 0; r < n; ++r) {
    for (int64_t c = 0; c < n; ++c) {
      const double x = c + 0.5, y = r + 0.5;
      double nearest = INFINITY;
      for (const auto& e : blobs) nearest = std::min(nearest, e.radius(x, y));
      msk[r][c] = nearest <= 1.0 ? 1 : 0;
      const double alpha = 1.0 / (1.0 + std::exp(-20.0 * (1.0 - nearest)));
      for (int ch = 0; ch < 3; ++ch) {
        const double v = background[ch] * (1.0 - alpha) + foreground[ch] * alpha +
                         config.noise_std * standard_normal(rng);
        img[ch][r][c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  char id[32];
  std::snprintf(id, sizeof(id), "blob_%04lld", static_cast<long long>(index));
  return SampleRecord::make(Image(image), Mask(mask), "synthetic-blobs", id);
}

std::vector<SampleRecord> synthetic_blobs(const SyntheticBlobsConfig& config) {
  if (config.count < 0) throw std::invalid_argument("synthetic-blobs: negative count");
  std::vector<SampleRecord> out;
  out.reserve(config.count);
  for (int64_t i = 0; i < config.count; ++i) out.push_back(synthetic_blob(config, i));
  return out;
}

}  // namespace promptseg
