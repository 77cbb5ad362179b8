// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/data/image_io.hpp"

#include <filesystem>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "promptseg/core/errors.hpp"

namespace promptseg {

namespace {

// [H, W, 3] float RGB Mat -> [3, H, W] tensor.
torch::Tensor rgb_mat_to_tensor(const cv::Mat& rgb) {
  cv::Mat contiguous = rgb.isContinuous() ? rgb : rgb.clone();
  auto t = torch::from_blob(contiguous.data, {contiguous.rows, contiguous.cols, 3}, torch::kFloat32);
  return t.permute({2, 0, 1}).clone();
}

cv::Mat tensor_to_rgb_mat(const torch::Tensor& chw) {
  auto hwc = chw.detach().to(torch::kFloat32).permute({1, 2, 0}).contiguous();
  cv::Mat m(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_32FC3,
            hwc.data_ptr<float>());
  return m.clone();
}

cv::Mat mask_to_mat(const Mask& mask) {
  auto px = mask.pixels().contiguous();
  cv::Mat m(static_cast<int>(mask.height()), static_cast<int>(mask.width()), CV_8U,
            px.data_ptr<uint8_t>());
  return m.clone();
}

Mask mat_to_mask(const cv::Mat& m) {
  cv::Mat contiguous = m.isContinuous() ? m : m.clone();
  auto t = torch::from_blob(contiguous.data, {contiguous.rows, contiguous.cols}, torch::kUInt8);
  return Mask(t.clone());
}

void write_png(const std::string& path, const cv::Mat& m) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  if (!cv::imwrite(path, m)) throw std::runtime_error("cannot write '" + path + "'");
}

cv::Size cv_size(Size2 s) { return {static_cast<int>(s.second), static_cast<int>(s.first)}; }

}  // namespace

Image load_image(const std::string& path, std::optional<Size2> resize) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw std::runtime_error("cannot decode image '" + path + "'");
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  rgb.convertTo(rgb, CV_32FC3, 1.0 / 255.0);
  if (resize && (rgb.rows != resize->first || rgb.cols != resize->second)) {
    cv::resize(rgb, rgb, cv_size(*resize), 0, 0, cv::INTER_LINEAR);
  }
  return Image(rgb_mat_to_tensor(rgb));
}

Mask load_mask(const std::string& path, MaskRule rule, std::optional<Size2> resize) {
  cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw std::runtime_error("cannot decode mask '" + path + "'");
  if (raw.channels() > 1) {
    cv::Mat first;
    cv::extractChannel(raw, first, 0);
    raw = first;
  }
  cv::Mat values;
  raw.convertTo(values, CV_64F);
  cv::Mat binary = rule == MaskRule::kNonZero ? (values != 0.0) : (values > 127.0);
  binary /= 255;  // comparisons yield 0 / 255
  if (resize && (binary.rows != resize->first || binary.cols != resize->second)) {
    cv::resize(binary, binary, cv_size(*resize), 0, 0, cv::INTER_NEAREST);
  }
  return mat_to_mask(binary);
}

Image resize_image(const Image& image, Size2 size) {
  if (image.height() == size.first && image.width() == size.second) return image;
  cv::Mat m = tensor_to_rgb_mat(image.pixels());
  cv::resize(m, m, cv_size(size), 0, 0, cv::INTER_LINEAR);
  return Image(rgb_mat_to_tensor(m));
}

Mask resize_mask(const Mask& mask, Size2 size) {
  if (mask.height() == size.first && mask.width() == size.second) return mask;
  cv::Mat m = mask_to_mat(mask);
  cv::resize(m, m, cv_size(size), 0, 0, cv::INTER_NEAREST);
  return mat_to_mask(m);
}

void save_mask_png(const std::string& path, const Mask& mask) {
  write_png(path, mask_to_mat(mask) * 255);
}

void save_probability_png(const std::string& path, const torch::Tensor& probabilities) {
  if (probabilities.dim() != 2) {
    throw ShapeError("probability map must be [H, W], got " +
                     format_shape(probabilities.sizes().vec()));
  }
  auto scaled = (probabilities.detach().to(torch::kFloat64).clamp(0.0, 1.0) * 255.0)
                    .round()
                    .to(torch::kUInt8)
                    .contiguous();
  cv::Mat m(static_cast<int>(scaled.size(0)), static_cast<int>(scaled.size(1)), CV_8U,
            scaled.data_ptr<uint8_t>());
  write_png(path, m);
}

void save_image_png(const std::string& path, const Image& image) {
  cv::Mat rgb = tensor_to_rgb_mat(image.pixels().clamp(0.0, 1.0));
  cv::Mat bgr8;
  cv::cvtColor(rgb, rgb, cv::COLOR_RGB2BGR);
  rgb.convertTo(bgr8, CV_8UC3, 255.0);
  write_png(path, bgr8);
}

Size2 image_size(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw std::runtime_error("cannot decode image '" + path + "'");
  return {m.rows, m.cols};
}

}  // namespace promptseg
