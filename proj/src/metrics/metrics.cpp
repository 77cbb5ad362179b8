// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>

#include "promptseg/metrics/distance_transform.hpp"

namespace promptseg {

namespace {

constexpr double kEps = DBL_EPSILON;

struct Counts {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

Counts count(const BinaryMap& pred, const BinaryMap& gt) {
  require_same_dims(pred, gt, "metric");
  Counts c;
  for (int64_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.data[i] != 0;
    const bool g = gt.data[i] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// 7x7 Gaussian, sigma 5, normalized; the 2-D kernel is the outer product.
std::array<double, 7> gaussian_kernel() {
  std::array<double, 7> k{};
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double x = i - 3;
    k[i] = std::exp(-x * x / (2.0 * 25.0));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// 'same'-size correlation with zero padding, separable.
std::vector<double> gaussian_filter(const std::vector<double>& in, int64_t h, int64_t w) {
  const auto k = gaussian_kernel();
  std::vector<double> tmp(h * w, 0.0), out(h * w, 0.0);
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (int64_t j = -3; j <= 3; ++j) {
        const int64_t cc = c + j;
        if (cc >= 0 && cc < w) s += k[j + 3] * in[r * w + cc];
      }
      tmp[r * w + c] = s;
    }
  }
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      double s = 0.0;
      for (int64_t i = -3; i <= 3; ++i) {
        const int64_t rr = r + i;
        if (rr >= 0 && rr < h) s += k[i + 3] * tmp[rr * w + c];
      }
      out[r * w + c] = s;
    }
  }
  return out;
}

// Object-level similarity of the values in one region.
double object_score(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sigma = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return 2.0 * mean / (mean * mean + 1.0 + sigma + kEps);
}

double s_object(const ProbMap& pred, const BinaryMap& gt) {
  std::vector<double> fg, bg;
  for (int64_t i = 0; i < gt.size(); ++i) {
    if (gt.data[i]) {
      fg.push_back(pred.data[i]);
    } else {
      bg.push_back(1.0 - pred.data[i]);
    }
  }
  const double u = static_cast<double>(fg.size()) / static_cast<double>(gt.size());
  return u * object_score(fg) + (1.0 - u) * object_score(bg);
}

// Structural similarity of one quadrant.
double quadrant_ssim(const ProbMap& pred, const BinaryMap& gt, int64_t r0, int64_t r1, int64_t c0,
                     int64_t c1) {
  const double n = static_cast<double>((r1 - r0) * (c1 - c0));
  double x = 0.0, y = 0.0;
  for (int64_t r = r0; r < r1; ++r) {
    for (int64_t c = c0; c < c1; ++c) {
      x += pred.at(r, c);
      y += gt.at(r, c);
    }
  }
  x /= n;
  y /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int64_t r = r0; r < r1; ++r) {
    for (int64_t c = c0; c < c1; ++c) {
      const double dx = pred.at(r, c) - x;
      const double dy = gt.at(r, c) - y;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
  }
  const double denom = n - 1.0 + kEps;
  sxx /= denom;
  syy /= denom;
  sxy /= denom;
  const double alpha = 4.0 * x * y * sxy;
  const double beta = (x * x + y * y) * (sxx + syy);
  if (alpha != 0.0) return alpha / beta;
  return beta == 0.0 ? 1.0 : 0.0;
}

double s_region(const ProbMap& pred, const BinaryMap& gt) {
  const int64_t h = gt.height, w = gt.width;
  // Centroid in 1-based pixel coordinates, rounded half away from zero.
  double total = 0.0, sum_col = 0.0, sum_row = 0.0;
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      if (!gt.at(r, c)) continue;
      total += 1.0;
      sum_col += static_cast<double>(c + 1);
      sum_row += static_cast<double>(r + 1);
    }
  }
  int64_t x, y;
  if (total == 0.0) {
    x = std::llround(static_cast<double>(w) / 2.0);
    y = std::llround(static_cast<double>(h) / 2.0);
  } else {
    x = std::llround(sum_col / total);
    y = std::llround(sum_row / total);
  }
  const std::array<std::array<int64_t, 4>, 4> quads{{{0, y, 0, x},
                                                     {0, y, x, w},
                                                     {y, h, 0, x},
                                                     {y, h, x, w}}};
  double q = 0.0;
  for (const auto& b : quads) {
    const int64_t area = (b[1] - b[0]) * (b[3] - b[2]);
    if (area == 0) continue;
    q += static_cast<double>(area) * quadrant_ssim(pred, gt, b[0], b[1], b[2], b[3]);
  }
  return q / static_cast<double>(h * w);
}

}  // namespace

BinaryMap threshold_map(const ProbMap& prob, double threshold) {
  BinaryMap out(prob.height, prob.width);
  for (int64_t i = 0; i < prob.size(); ++i) out.data[i] = prob.data[i] >= threshold ? 1 : 0;
  return out;
}

ProbMap to_prob(const BinaryMap& mask) {
  ProbMap out(mask.height, mask.width);
  for (int64_t i = 0; i < mask.size(); ++i) out.data[i] = mask.data[i] ? 1.0 : 0.0;
  return out;
}

double dice_score(const BinaryMap& pred, const BinaryMap& gt) {
  const auto c = count(pred, gt);
  const double den = 2.0 * c.tp + c.fp + c.fn;
  return den == 0.0 ? 1.0 : 2.0 * c.tp / den;
}

double iou_score(const BinaryMap& pred, const BinaryMap& gt) {
  const auto c = count(pred, gt);
  const double den = c.tp + c.fp + c.fn;
  return den == 0.0 ? 1.0 : c.tp / den;
}

double sensitivity(const BinaryMap& pred, const BinaryMap& gt) {
  const auto c = count(pred, gt);
  const double den = c.tp + c.fn;
  return den == 0.0 ? 1.0 : c.tp / den;
}

double precision(const BinaryMap& pred, const BinaryMap& gt) {
  const auto c = count(pred, gt);
  return safe_ratio(c.tp, c.tp + c.fp);
}

double f_beta(const BinaryMap& pred, const BinaryMap& gt, double beta_sq) {
  const double prc = precision(pred, gt);
  const double rcl = sensitivity(pred, gt);
  return safe_ratio((1.0 + beta_sq) * prc * rcl, beta_sq * prc + rcl);
}

double weighted_f_beta(const ProbMap& pred, const BinaryMap& gt, double beta_sq) {
  require_same_dims(pred, gt, "weighted_f_beta");
  const int64_t n = gt.size();
  int64_t gt_count = 0;
  for (uint8_t v : gt.data) gt_count += v ? 1 : 0;
  if (gt_count == 0) {
    const bool all_zero = std::all_of(pred.data.begin(), pred.data.end(),
                                      [](double v) { return v == 0.0; });
    return all_zero ? 1.0 : 0.0;
  }

  std::vector<double> err(n);
  for (int64_t i = 0; i < n; ++i) err[i] = std::abs(pred.data[i] - (gt.data[i] ? 1.0 : 0.0));

  // Background errors take the value at their nearest object pixel before smoothing.
  const auto field = distance_to_foreground(gt);
  std::vector<double> spread(n);
  for (int64_t i = 0; i < n; ++i) spread[i] = gt.data[i] ? err[i] : err[field.nearest[i]];
  const auto smoothed = gaussian_filter(spread, gt.height, gt.width);

  const double decay = std::log(0.5) / 5.0;
  double sum_fg = 0.0, sum_bg = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    if (gt.data[i]) {
      sum_fg += std::min(err[i], smoothed[i]);
    } else {
      sum_bg += err[i] * (2.0 - std::exp(decay * field.distance[i]));
    }
  }
  const double tp = static_cast<double>(gt_count) - sum_fg;
  const double recall = 1.0 - sum_fg / static_cast<double>(gt_count);
  const double prec = safe_ratio(tp, tp + sum_bg);
  return std::clamp(safe_ratio((1.0 + beta_sq) * recall * prec, recall + beta_sq * prec), 0.0, 1.0);
}

double s_measure(const ProbMap& pred, const BinaryMap& gt, double alpha) {
  require_same_dims(pred, gt, "s_measure");
  double fg = 0.0;
  for (uint8_t v : gt.data) fg += v ? 1.0 : 0.0;
  double mean_pred = 0.0;
  for (double v : pred.data) mean_pred += v;
  mean_pred /= static_cast<double>(pred.size());
  if (fg == 0.0) return 1.0 - mean_pred;
  if (fg == static_cast<double>(gt.size())) return mean_pred;
  const double q = alpha * s_object(pred, gt) + (1.0 - alpha) * s_region(pred, gt);
  return std::clamp(q, 0.0, 1.0);
}

double enhanced_alignment(const BinaryMap& pred, const BinaryMap& gt) {
  require_same_dims(pred, gt, "enhanced_alignment");
  const int64_t n = gt.size();
  double fg = 0.0, mu_pred = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    fg += gt.data[i] ? 1.0 : 0.0;
    mu_pred += pred.data[i] ? 1.0 : 0.0;
  }
  double sum = 0.0;
  if (fg == 0.0) {
    for (int64_t i = 0; i < n; ++i) sum += pred.data[i] ? 0.0 : 1.0;
  } else if (fg == static_cast<double>(n)) {
    for (int64_t i = 0; i < n; ++i) sum += pred.data[i] ? 1.0 : 0.0;
  } else {
    const double mu_gt = fg / static_cast<double>(n);
    mu_pred /= static_cast<double>(n);
    for (int64_t i = 0; i < n; ++i) {
      const double a = (gt.data[i] ? 1.0 : 0.0) - mu_gt;
      const double b = (pred.data[i] ? 1.0 : 0.0) - mu_pred;
      const double align = safe_ratio(2.0 * a * b, a * a + b * b);
      sum += (align + 1.0) * (align + 1.0) / 4.0;
    }
  }
  return sum / static_cast<double>(n);
}

double e_measure(const ProbMap& pred, const BinaryMap& gt) {
  require_same_dims(pred, gt, "e_measure");
  BinaryMap bin(pred.height, pred.width);
  double total = 0.0;
  for (int t = 0; t < 256; ++t) {
    const double cut = static_cast<double>(t) / 256.0;
    for (int64_t i = 0; i < pred.size(); ++i) bin.data[i] = pred.data[i] > cut ? 1 : 0;
    total += enhanced_alignment(bin, gt);
  }
  return total / 256.0;
}

}  // namespace promptseg
