// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/data/augment.hpp"

#include <c10/util/Logging.h>

#include <opencv2/imgproc.hpp>
#include <torch/torch.h>

#include "promptseg/core/random.hpp"

namespace promptseg {

namespace {

torch::Tensor grayscale(const torch::Tensor& rgb) {
  return (0.2989 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]).unsqueeze(0);
}

torch::Tensor blend(const torch::Tensor& a, const torch::Tensor& b, double ratio) {
  return (ratio * a + (1.0 - ratio) * b).clamp(0.0, 1.0);
}

torch::Tensor rgb_to_hsv(const torch::Tensor& rgb) {
  auto r = rgb[0], g = rgb[1], b = rgb[2];
  auto maxc = std::get<0>(rgb.max(0));
  auto minc = std::get<0>(rgb.min(0));
  auto eqc = maxc == minc;
  auto cr = maxc - minc;
  auto ones = torch::ones_like(maxc);
  auto s = cr / torch::where(eqc, ones, maxc);
  auto cr_div = torch::where(eqc, ones, cr);
  auto rc = (maxc - r) / cr_div;
  auto gc = (maxc - g) / cr_div;
  auto bc = (maxc - b) / cr_div;
  auto hr = (maxc == r).to(rgb.dtype()) * (bc - gc);
  auto hg = ((maxc == g) & (maxc != r)).to(rgb.dtype()) * (2.0 + rc - bc);
  auto hb = ((maxc != g) & (maxc != r)).to(rgb.dtype()) * (4.0 + gc - rc);
  auto h = torch::fmod((hr + hg + hb) / 6.0 + 1.0, 1.0);
  return torch::stack({h, s, maxc});
}

torch::Tensor hsv_to_rgb(const torch::Tensor& hsv) {
  auto h = hsv[0], s = hsv[1], v = hsv[2];
  auto i = torch::floor(h * 6.0);
  auto f = h * 6.0 - i;
  auto sector = torch::remainder(i.to(torch::kInt64), 6);
  auto p = (v * (1.0 - s)).clamp(0.0, 1.0);
  auto q = (v * (1.0 - s * f)).clamp(0.0, 1.0);
  auto t = (v * (1.0 - s * (1.0 - f))).clamp(0.0, 1.0);
  auto pick = [&sector](const std::array<torch::Tensor, 6>& by_sector) {
    auto out = torch::zeros_like(by_sector[0]);
    for (int k = 0; k < 6; ++k) out = torch::where(sector == k, by_sector[k], out);
    return out;
  };
  return torch::stack({pick({v, q, p, p, t, v}), pick({t, v, v, q, p, p}),
                       pick({p, p, t, v, v, q})});
}

cv::Mat to_mat(const torch::Tensor& chw) {
  auto hwc = chw.permute({1, 2, 0}).contiguous();
  return cv::Mat(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_32FC3,
                 hwc.data_ptr<float>())
      .clone();
}

torch::Tensor from_mat(const cv::Mat& m) {
  return torch::from_blob(m.data, {m.rows, m.cols, 3}, torch::kFloat32).permute({2, 0, 1}).clone();
}

}  // namespace

torch::Tensor adjust_brightness(const torch::Tensor& rgb, double factor) {
  return (rgb * factor).clamp(0.0, 1.0);
}

torch::Tensor adjust_contrast(const torch::Tensor& rgb, double factor) {
  return blend(rgb, grayscale(rgb).mean(), factor);
}

torch::Tensor adjust_saturation(const torch::Tensor& rgb, double factor) {
  return blend(rgb, grayscale(rgb), factor);
}

torch::Tensor adjust_hue(const torch::Tensor& rgb, double shift) {
  auto hsv = rgb_to_hsv(rgb);
  hsv[0] = torch::remainder(hsv[0] + shift, 1.0);
  return hsv_to_rgb(hsv);
}

bool AugmentDraw::is_identity() const {
  return !hflip && rotation_deg == 0.0 && scale_offset == 0.0 && translate_x == 0.0 &&
         translate_y == 0.0 && brightness == 0.0 && contrast == 0.0 && saturation == 0.0 &&
         hue == 0.0;
}

bool AugmentationRecipe::is_identity() const {
  return hflip_probability == 0.0 && max_rotation_deg == 0.0 && max_scale_offset == 0.0 &&
         max_translate == 0.0 && brightness == 0.0 && contrast == 0.0 && saturation == 0.0 &&
         hue == 0.0;
}

AugmentDraw AugmentationRecipe::sample(std::mt19937_64& rng) const {
  // Every field consumes its draws, so the stream layout does not depend on the recipe.
  AugmentDraw d;
  d.hflip = uniform01(rng) < hflip_probability;
  d.rotation_deg = uniform(rng, -1.0, 1.0) * max_rotation_deg;
  d.scale_offset = uniform(rng, -1.0, 1.0) * max_scale_offset;
  d.translate_x = uniform(rng, -1.0, 1.0) * max_translate;
  d.translate_y = uniform(rng, -1.0, 1.0) * max_translate;
  d.brightness = uniform(rng, -1.0, 1.0) * brightness;
  d.contrast = uniform(rng, -1.0, 1.0) * contrast;
  d.saturation = uniform(rng, -1.0, 1.0) * saturation;
  d.hue = uniform(rng, -1.0, 1.0) * hue;
  std::vector<int> order{0, 1, 2, 3};
  portable_shuffle(order, rng);
  std::copy(order.begin(), order.end(), d.jitter_order.begin());
  return d;
}

SampleRecord AugmentationRecipe::apply(const SampleRecord& sample, const AugmentDraw& d) const {
  if (d.is_identity()) return sample;
  auto image = sample.image.pixels().to(torch::kFloat32);
  auto mask = sample.mask.pixels();

  for (int op : d.jitter_order) {
    switch (op) {
      case 0:
        if (d.brightness != 0.0) image = adjust_brightness(image, 1.0 + d.brightness);
        break;
      case 1:
        if (d.contrast != 0.0) image = adjust_contrast(image, 1.0 + d.contrast);
        break;
      case 2:
        if (d.saturation != 0.0) image = adjust_saturation(image, 1.0 + d.saturation);
        break;
      case 3:
        if (d.hue != 0.0) image = adjust_hue(image, d.hue);
        break;
    }
  }

  if (d.hflip) {
    image = image.flip({2});
    mask = mask.flip({1});
  }

  if (d.rotation_deg != 0.0 || d.scale_offset != 0.0 || d.translate_x != 0.0 ||
      d.translate_y != 0.0) {
    const int h = static_cast<int>(image.size(1));
    const int w = static_cast<int>(image.size(2));
    cv::Mat affine = cv::getRotationMatrix2D(cv::Point2f((w - 1) * 0.5f, (h - 1) * 0.5f),
                                             d.rotation_deg, 1.0 + d.scale_offset);
    affine.at<double>(0, 2) += d.translate_x * w;
    affine.at<double>(1, 2) += d.translate_y * h;
    cv::Mat img_out, mask_out;
    cv::warpAffine(to_mat(image.contiguous()), img_out, affine, cv::Size(w, h), cv::INTER_LINEAR,
                   cv::BORDER_CONSTANT, cv::Scalar::all(0));
    auto mask_c = mask.contiguous();
    cv::Mat mask_in(h, w, CV_8U, mask_c.data_ptr<uint8_t>());
    cv::warpAffine(mask_in, mask_out, affine, cv::Size(w, h), cv::INTER_NEAREST,
                   cv::BORDER_CONSTANT, cv::Scalar::all(0));
    image = from_mat(img_out);
    mask = torch::from_blob(mask_out.data, {h, w}, torch::kUInt8).clone();
  }

  return SampleRecord::make(Image(image.contiguous()), Mask(mask.contiguous()), sample.dataset_id,
                            sample.source_path, sample.frame_index);
}

AugmentationRecipe make_augmenter(const std::string& dataset) {
  AugmentationRecipe r;
  if (dataset == "glas") {
    r.name = "glas";
    r.brightness = 0.2;
    r.contrast = 0.2;
    r.saturation = 0.2;
    r.hue = 0.1;
    r.hflip_probability = 0.5;
    r.max_translate = 0.05;
    r.max_scale_offset = 0.2;
  } else if (dataset == "monuseg") {
    r.name = "monuseg";
    r.max_rotation_deg = 20.0;
    r.max_scale_offset = 0.25;
    r.hflip_probability = 0.5;
    r.brightness = 0.4;
    r.contrast = 0.4;
    r.saturation = 0.4;
    r.hue = 0.1;
  } else if (dataset == "none" || dataset == "identity" || dataset == "polyp-combined" ||
             dataset == "sunseg" || dataset == "synthetic-blobs") {
    r.name = "identity";
  } else {
    LOG(WARNING) << "no augmentation recipe for dataset '" << dataset << "', using identity";
    r.name = "identity";
  }
  return r;
}

}  // namespace promptseg
