// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/metrics/distance_transform.hpp"

#include <cmath>
#include <limits>

namespace promptseg {

DistanceField distance_to_foreground(const BinaryMap& foreground) {
  const int64_t h = foreground.height;
  const int64_t w = foreground.width;
  constexpr int64_t kNone = -1;

  // Column pass: nearest foreground row within each column, upper row on ties.
  std::vector<int64_t> column_row(h * w, kNone);
  for (int64_t c = 0; c < w; ++c) {
    int64_t above = kNone;
    for (int64_t r = 0; r < h; ++r) {
      if (foreground.at(r, c)) above = r;
      column_row[r * w + c] = above;
    }
    int64_t below = kNone;
    for (int64_t r = h - 1; r >= 0; --r) {
      if (foreground.at(r, c)) below = r;
      int64_t& best = column_row[r * w + c];
      if (below != kNone && (best == kNone || below - r < r - best)) best = below;
    }
  }

  // Row pass: search columns outward from c until the horizontal offset alone
  // exceeds the best squared distance.
  DistanceField out;
  out.distance.assign(h * w, std::numeric_limits<double>::infinity());
  out.nearest.assign(h * w, kNone);
  for (int64_t r = 0; r < h; ++r) {
    for (int64_t c = 0; c < w; ++c) {
      int64_t best = std::numeric_limits<int64_t>::max();
      int64_t best_col = kNone;
      int64_t best_row = kNone;
      for (int64_t d = 0; d < w && (best_col == kNone || d * d <= best); ++d) {
        for (int64_t cc : {c - d, c + d}) {
          if (cc < 0 || cc >= w || (d == 0 && cc != c - d)) continue;
          const int64_t rr = column_row[r * w + cc];
          if (rr == kNone) continue;
          const int64_t dist = d * d + (r - rr) * (r - rr);
          if (dist < best || (dist == best && cc < best_col)) {
            best = dist;
            best_col = cc;
            best_row = rr;
          }
        }
      }
      if (best_col != kNone) {
        out.distance[r * w + c] = std::sqrt(static_cast<double>(best));
        out.nearest[r * w + c] = best_row * w + best_col;
      }
    }
  }
  return out;
}

}  // namespace promptseg
