// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Analytic multiply-accumulate counts. Only convolutions contribute; batch
// norm, activations, pooling and bilinear resizing are not counted.

#pragma once

#include <cstdint>

#include "promptseg/prompt_generator/prompt_generator.hpp"

namespace promptseg {

/// out_h * out_w * out_channels * (in_channels / groups) * kernel^2
int64_t conv2d_macs(int64_t in_channels, int64_t out_channels, int64_t kernel, int64_t out_h,
                    int64_t out_w, int64_t groups = 1);

int64_t conv_output_size(int64_t in, int64_t kernel, int64_t stride, int64_t padding);

/// MACs of one forward pass of g on a square input of side `input_size`.
int64_t count_flops(const GeneratorConfig& config, int64_t input_size);
int64_t count_flops(const PromptGeneratorImpl& g, int64_t input_size);

}  // namespace promptseg
