// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Direct transcriptions of the saliency evaluation measures on plain
// row-major arrays: brute-force nearest-object search, a dense 2-D Gaussian
// kernel and the eps-regularized divisions of the reference formulas. Written
// for clarity, not speed; 16 x 16 inputs only.

#pragma once

#include <cfloat>
#include <cmath>
#include <limits>
#include <vector>

namespace promptseg::oracle {

struct Grid {
  int h = 0;
  int w = 0;
  std::vector<double> v;  // row-major
  double operator()(int r, int c) const { return v[static_cast<size_t>(r * w + c)]; }
};

inline constexpr double kEps = DBL_EPSILON;

/// For every pixel, the distance to and index of the closest GT pixel.
/// Candidates are scanned column by column, so ties keep the first index in
/// column-major order.
inline void nearest_object(const Grid& gt, std::vector<double>& dist, std::vector<int>& idx) {
  dist.assign(gt.v.size(), std::numeric_limits<double>::infinity());
  idx.assign(gt.v.size(), -1);
  for (int r = 0; r < gt.h; ++r) {
    for (int c = 0; c < gt.w; ++c) {
      const int i = r * gt.w + c;
      for (int cc = 0; cc < gt.w; ++cc) {
        for (int rr = 0; rr < gt.h; ++rr) {
          if (gt(rr, cc) == 0.0) continue;
          const double d = std::hypot(static_cast<double>(r - rr), static_cast<double>(c - cc));
          if (d < dist[i]) {
            dist[i] = d;
            idx[i] = rr * gt.w + cc;
          }
        }
      }
    }
  }
}

/// Weighted F-measure.
inline double weighted_f(const Grid& fg, const Grid& gt, double beta2 = 1.0) {
  const int n = gt.h * gt.w;
  int positives = 0;
  for (double g : gt.v) positives += g != 0.0;
  if (positives == 0) {
    for (double p : fg.v) {
      if (p != 0.0) return 0.0;
    }
    return 1.0;
  }
  std::vector<double> e(n);
  for (int i = 0; i < n; ++i) e[i] = std::fabs(fg.v[i] - gt.v[i]);
  std::vector<double> dst;
  std::vector<int> idxt;
  nearest_object(gt, dst, idxt);
  std::vector<double> et = e;
  for (int i = 0; i < n; ++i) {
    if (gt.v[i] == 0.0) et[i] = e[idxt[i]];
  }
  // 7 x 7 Gaussian, sigma 5, normalized over the whole 2-D window.
  double kernel[7][7];
  double ksum = 0.0;
  for (int a = 0; a < 7; ++a) {
    for (int b = 0; b < 7; ++b) {
      kernel[a][b] = std::exp(-((a - 3) * (a - 3) + (b - 3) * (b - 3)) / (2.0 * 5.0 * 5.0));
      ksum += kernel[a][b];
    }
  }
  std::vector<double> ea(n, 0.0);
  for (int r = 0; r < gt.h; ++r) {
    for (int c = 0; c < gt.w; ++c) {
      double s = 0.0;
      for (int a = 0; a < 7; ++a) {
        for (int b = 0; b < 7; ++b) {
          const int rr = r + a - 3;
          const int cc = c + b - 3;
          if (rr < 0 || rr >= gt.h || cc < 0 || cc >= gt.w) continue;
          s += kernel[a][b] / ksum * et[rr * gt.w + cc];
        }
      }
      ea[r * gt.w + c] = s;
    }
  }
  std::vector<double> min_e_ea = e;
  for (int i = 0; i < n; ++i) {
    if (gt.v[i] != 0.0 && ea[i] < e[i]) min_e_ea[i] = ea[i];
  }
  std::vector<double> ew(n);
  for (int i = 0; i < n; ++i) {
    const double b = gt.v[i] != 0.0 ? 1.0 : 2.0 - std::exp(std::log(1.0 - 0.5) / 5.0 * dst[i]);
    ew[i] = min_e_ea[i] * b;
  }
  double ew_fg = 0.0, ew_bg = 0.0;
  for (int i = 0; i < n; ++i) (gt.v[i] != 0.0 ? ew_fg : ew_bg) += ew[i];
  const double tpw = positives - ew_fg;
  const double fpw = ew_bg;
  const double recall = 1.0 - ew_fg / positives;
  const double prec = tpw / (kEps + tpw + fpw);
  return (1.0 + beta2) * recall * prec / (kEps + recall + beta2 * prec);
}

inline double object_term(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
  return 2.0 * mean / (mean * mean + 1.0 + sd + kEps);
}

inline double s_object(const Grid& p, const Grid& gt) {
  std::vector<double> fg, bg;
  for (size_t i = 0; i < gt.v.size(); ++i) {
    if (gt.v[i] != 0.0) {
      fg.push_back(p.v[i]);
    } else {
      bg.push_back(1.0 - p.v[i]);
    }
  }
  const double u = static_cast<double>(fg.size()) / static_cast<double>(gt.v.size());
  return u * object_term(fg) + (1.0 - u) * object_term(bg);
}

inline double ssim(const Grid& p, const Grid& gt, int r0, int r1, int c0, int c1) {
  const double n = static_cast<double>((r1 - r0) * (c1 - c0));
  double x = 0.0, y = 0.0;
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) {
      x += p(r, c) / n;
      y += gt(r, c) / n;
    }
  }
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) {
      sx += (p(r, c) - x) * (p(r, c) - x) / (n - 1.0 + kEps);
      sy += (gt(r, c) - y) * (gt(r, c) - y) / (n - 1.0 + kEps);
      sxy += (p(r, c) - x) * (gt(r, c) - y) / (n - 1.0 + kEps);
    }
  }
  const double alpha = 4.0 * x * y * sxy;
  const double beta = (x * x + y * y) * (sx + sy);
  if (alpha != 0.0) return alpha / (beta + kEps);
  return beta == 0.0 ? 1.0 : 0.0;
}

inline double s_region(const Grid& p, const Grid& gt) {
  double total = 0.0, xs = 0.0, ys = 0.0;
  for (int r = 0; r < gt.h; ++r) {
    for (int c = 0; c < gt.w; ++c) {
      if (gt(r, c) == 0.0) continue;
      total += 1.0;
      xs += c + 1;
      ys += r + 1;
    }
  }
  const int x = static_cast<int>(std::round(xs / total));
  const int y = static_cast<int>(std::round(ys / total));
  const double area = static_cast<double>(gt.h * gt.w);
  double q = 0.0;
  const int boxes[4][4] = {{0, y, 0, x}, {0, y, x, gt.w}, {y, gt.h, 0, x}, {y, gt.h, x, gt.w}};
  for (const auto& b : boxes) {
    const double weight = static_cast<double>((b[1] - b[0]) * (b[3] - b[2])) / area;
    if (weight == 0.0) continue;
    q += weight * ssim(p, gt, b[0], b[1], b[2], b[3]);
  }
  return q;
}

/// Structure measure.
inline double s_measure(const Grid& p, const Grid& gt, double alpha = 0.5) {
  double y = 0.0, mean_p = 0.0;
  for (size_t i = 0; i < gt.v.size(); ++i) {
    y += gt.v[i];
    mean_p += p.v[i];
  }
  y /= static_cast<double>(gt.v.size());
  mean_p /= static_cast<double>(gt.v.size());
  if (y == 0.0) return 1.0 - mean_p;
  if (y == 1.0) return mean_p;
  const double q = alpha * s_object(p, gt) + (1.0 - alpha) * s_region(p, gt);
  return q < 0.0 ? 0.0 : q;
}

/// Enhanced alignment of a binary map, normalized by W * H.
inline double alignment(const Grid& fm, const Grid& gt) {
  const double n = static_cast<double>(gt.v.size());
  double g_sum = 0.0;
  for (double g : gt.v) g_sum += g;
  double enhanced = 0.0;
  if (g_sum == 0.0) {
    for (double f : fm.v) enhanced += 1.0 - f;
  } else if (g_sum == n) {
    for (double f : fm.v) enhanced += f;
  } else {
    double mu_f = 0.0;
    for (double f : fm.v) mu_f += f;
    mu_f /= n;
    const double mu_g = g_sum / n;
    for (size_t i = 0; i < gt.v.size(); ++i) {
      const double ag = gt.v[i] - mu_g;
      const double af = fm.v[i] - mu_f;
      const double align = 2.0 * ag * af / (ag * ag + af * af + kEps);
      enhanced += (align + 1.0) * (align + 1.0) / 4.0;
    }
  }
  return enhanced / n;
}

/// Mean enhanced alignment over the binarizations p > t / 256, t = 0..255.
inline double e_measure(const Grid& p, const Grid& gt) {
  double sum = 0.0;
  for (int t = 0; t < 256; ++t) {
    Grid fm{p.h, p.w, std::vector<double>(p.v.size())};
    for (size_t i = 0; i < p.v.size(); ++i) fm.v[i] = p.v[i] > t / 256.0 ? 1.0 : 0.0;
    sum += alignment(fm, gt);
  }
  return sum / 256.0;
}

}  // namespace promptseg::oracle
