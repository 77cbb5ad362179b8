// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/prompt_generator/flops.hpp"

#include <stdexcept>

namespace promptseg {

int64_t conv2d_macs(int64_t in_channels, int64_t out_channels, int64_t kernel, int64_t out_h,
                    int64_t out_w, int64_t groups) {
  return out_h * out_w * out_channels * (in_channels / groups) * kernel * kernel;
}

int64_t conv_output_size(int64_t in, int64_t kernel, int64_t stride, int64_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

int64_t count_flops(const GeneratorConfig& config, int64_t input_size) {
  if (input_size < kMinImageSide) throw std::invalid_argument("count_flops: input too small");
  const HarDNetSpec spec = config.encoder_spec();
  spec.validate();

  int64_t macs = 0;
  int64_t side = conv_output_size(input_size, 3, 2, 1);
  macs += conv2d_macs(3, spec.stem_channels[0], 3, side, side);
  macs += conv2d_macs(spec.stem_channels[0], spec.stem_channels[1], 3, side, side);
  side = conv_output_size(side, 3, 2, 1);

  int stride = 4;
  int64_t ch = spec.stem_channels[1];
  int64_t side4 = 0, side8 = 0, ch4 = 0, ch8 = 0;
  for (size_t i = 0; i < spec.block_channels.size(); ++i) {
    const auto plan = HarDBlockPlan::make(ch, spec.growth_rates[i], spec.growth_multiplier,
                                          spec.layers_per_block[i]);
    for (const auto& layer : plan.layers) {
      macs += conv2d_macs(layer.in_channels, layer.out_channels, 3, side, side);
    }
    macs += conv2d_macs(plan.out_channels, spec.block_channels[i], 1, side, side);
    ch = spec.block_channels[i];
    if (stride == 4) {
      side4 = side;
      ch4 = ch;
    } else if (stride == 8) {
      side8 = side;
      ch8 = ch;
    }
    if (spec.downsample_after[i]) {
      stride *= 2;
      side = conv_output_size(side, 2, 2, 0);
    }
  }

  const int64_t d = config.decoder_channels;
  macs += conv2d_macs(ch + ch8, d, 3, side8, side8) + conv2d_macs(d, d, 3, side8, side8);
  macs += conv2d_macs(d + ch4, d, 3, side4, side4) + conv2d_macs(d, d, 3, side4, side4);
  return macs;
}

int64_t count_flops(const PromptGeneratorImpl& g, int64_t input_size) {
  return count_flops(g.config(), input_size);
}

}  // namespace promptseg
