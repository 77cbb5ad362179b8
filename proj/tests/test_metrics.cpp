// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles/metric_oracle.hpp"
#include "promptseg/metrics/distance_transform.hpp"
#include "promptseg/metrics/metrics.hpp"
#include "promptseg/metrics/report.hpp"

using namespace promptseg;

namespace {

BinaryMap random_binary(std::mt19937_64& rng, int h, int w, double p) {
  std::bernoulli_distribution bit(p);
  BinaryMap m(h, w);
  for (auto& v : m.data) v = bit(rng) ? 1 : 0;
  return m;
}

// Filled rectangle plus salt noise: a structured mask with a real interior.
BinaryMap random_shape(std::mt19937_64& rng, int h, int w) {
  std::uniform_int_distribution<int> rd(0, h - 1), cd(0, w - 1);
  int r0 = rd(rng), r1 = rd(rng), c0 = cd(rng), c1 = cd(rng);
  if (r0 > r1) std::swap(r0, r1);
  if (c0 > c1) std::swap(c0, c1);
  BinaryMap m(h, w);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) m.at(r, c) = 1;
  }
  std::bernoulli_distribution flip(0.05);
  for (auto& v : m.data) {
    if (flip(rng)) v = 1 - v;
  }
  return m;
}

ProbMap random_prob(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbMap p(h, w);
  for (auto& v : p.data) v = u(rng);
  return p;
}

// Prediction correlated with the GT so the measures span their range.
ProbMap noisy_copy(std::mt19937_64& rng, const BinaryMap& gt, double noise) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbMap p(gt.height, gt.width);
  for (int64_t i = 0; i < gt.size(); ++i) {
    const double target = gt.data[i] ? 1.0 : 0.0;
    p.data[i] = std::clamp(target + noise * (u(rng) - 0.5) * 2.0, 0.0, 1.0);
  }
  return p;
}

oracle::Grid grid(const ProbMap& p) { return {int(p.height), int(p.width), p.data}; }
oracle::Grid grid(const BinaryMap& m) {
  oracle::Grid g{int(m.height), int(m.width), std::vector<double>(m.data.size())};
  for (size_t i = 0; i < m.data.size(); ++i) g.v[i] = m.data[i];
  return g;
}

}  // namespace

TEST(OverlapMetrics, DiceIouIdentityOnRandomPairs) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 1000; ++k) {
    const double density = 0.05 + 0.9 * (k % 10) / 9.0;
    const auto p = random_binary(rng, 16, 16, density);
    const auto g = random_binary(rng, 16, 16, 0.5);
    const double dice = dice_score(p, g);
    const double iou = iou_score(p, g);
    EXPECT_NEAR(dice, 2.0 * iou / (1.0 + iou), 1e-12);
    EXPECT_NEAR(f_beta(p, g, 1.0), dice, 1e-12);
  }
}

TEST(OverlapMetrics, HandCounts) {
  // 2x2: TP 1, FP 1, FN 1, TN 1.
  BinaryMap p(2, 2, std::vector<uint8_t>{1, 1, 0, 0});
  BinaryMap g(2, 2, std::vector<uint8_t>{1, 0, 1, 0});
  EXPECT_DOUBLE_EQ(dice_score(p, g), 0.5);
  EXPECT_DOUBLE_EQ(iou_score(p, g), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(sensitivity(p, g), 0.5);
  EXPECT_DOUBLE_EQ(precision(p, g), 0.5);
  EXPECT_DOUBLE_EQ(f_beta(p, g, 0.3), 0.5);
}

TEST(OverlapMetrics, EmptyConventions) {
  BinaryMap empty(4, 4);
  BinaryMap one(4, 4);
  one.at(1, 1) = 1;
  EXPECT_EQ(dice_score(empty, empty), 1.0);
  EXPECT_EQ(iou_score(empty, empty), 1.0);
  EXPECT_EQ(sensitivity(one, empty), 1.0);
  EXPECT_EQ(dice_score(empty, one), 0.0);
  EXPECT_EQ(f_beta(empty, one), 0.0);
}

TEST(OverlapMetrics, DimensionMismatchThrows) {
  EXPECT_THROW(dice_score(BinaryMap(3, 3), BinaryMap(3, 4)), std::invalid_argument);
  EXPECT_THROW(s_measure(ProbMap(3, 3), BinaryMap(4, 3)), std::invalid_argument);
}

TEST(DistanceTransform, MatchesBruteForceIncludingTies) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto m = random_binary(rng, 13, 17, 0.1);
    const auto field = distance_to_foreground(m);
    std::vector<double> dist;
    std::vector<int> idx;
    oracle::nearest_object(grid(m), dist, idx);
    for (size_t i = 0; i < dist.size(); ++i) {
      EXPECT_DOUBLE_EQ(field.distance[i], dist[i]) << "pixel " << i;
      EXPECT_EQ(field.nearest[i], idx[i]) << "pixel " << i;
    }
  }
}

TEST(DistanceTransform, NoForeground) {
  const auto field = distance_to_foreground(BinaryMap(3, 3));
  for (size_t i = 0; i < 9; ++i) {
    EXPECT_TRUE(std::isinf(field.distance[i]));
    EXPECT_EQ(field.nearest[i], -1);
  }
}

TEST(StructureMetrics, MatchOracleTranscriptions) {
  std::mt19937_64 rng(2026);
  for (int k = 0; k < 50; ++k) {
    const auto gt = k % 2 == 0 ? random_shape(rng, 16, 16) : random_binary(rng, 16, 16, 0.3);
    const auto pred = k % 3 == 0 ? random_prob(rng, 16, 16) : noisy_copy(rng, gt, 0.2 + 0.1 * (k % 7));
    EXPECT_NEAR(weighted_f_beta(pred, gt), oracle::weighted_f(grid(pred), grid(gt)), 1e-6) << k;
    EXPECT_NEAR(s_measure(pred, gt), oracle::s_measure(grid(pred), grid(gt)), 1e-6) << k;
    EXPECT_NEAR(e_measure(pred, gt), oracle::e_measure(grid(pred), grid(gt)), 1e-6) << k;
  }
}

TEST(StructureMetrics, PerfectPredictionIsExactlyOne) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto gt = k % 2 == 0 ? random_shape(rng, 16, 16) : random_binary(rng, 16, 16, 0.4);
    const auto pred = to_prob(gt);
    EXPECT_EQ(weighted_f_beta(pred, gt), 1.0) << k;
    EXPECT_EQ(s_measure(pred, gt), 1.0) << k;
    EXPECT_EQ(e_measure(pred, gt), 1.0) << k;
  }
}

TEST(StructureMetrics, DegenerateGroundTruth) {
  BinaryMap empty(8, 8);
  BinaryMap full(8, 8, uint8_t{1});
  ProbMap zeros(8, 8);
  ProbMap ones(8, 8, 1.0);
  ProbMap half(8, 8, 0.5);
  EXPECT_EQ(s_measure(zeros, empty), 1.0);
  EXPECT_EQ(s_measure(ones, full), 1.0);
  EXPECT_DOUBLE_EQ(s_measure(half, empty), 0.5);
  EXPECT_EQ(weighted_f_beta(zeros, empty), 1.0);
  EXPECT_EQ(weighted_f_beta(half, empty), 0.0);
  EXPECT_EQ(e_measure(zeros, empty), 1.0);
  EXPECT_EQ(e_measure(ones, empty), 0.0);
  EXPECT_EQ(e_measure(ones, full), 1.0);
}

TEST(StructureMetrics, ValuesInUnitInterval) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    const auto gt = random_binary(rng, 16, 16, 0.05 + 0.009 * k);
    const auto pred = random_prob(rng, 16, 16);
    for (double v : {weighted_f_beta(pred, gt), s_measure(pred, gt), e_measure(pred, gt)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ThresholdMap, InclusiveThreshold) {
  ProbMap p(1, 3, std::vector<double>{0.49, 0.5, 0.51});
  const auto b = threshold_map(p, 0.5);
  EXPECT_EQ(b.data, (std::vector<uint8_t>{0, 1, 1}));
}

TEST(Report, PerfectOracleGivesAllOnes) {
  std::mt19937_64 rng(1);
  std::vector<EvalItem> items;
  for (int k = 0; k < 6; ++k) {
    const auto gt = random_shape(rng, 16, 16);
    items.push_back({"s" + std::to_string(k), to_prob(gt), gt});
  }
  const auto r = evaluate_dataset(items, {}, 2);
  for (double v : {r.aggregate.dice, r.aggregate.iou, r.aggregate.sen, r.aggregate.f_beta,
                   r.aggregate.f_beta_w, r.aggregate.s_alpha, r.aggregate.e_phi_mn}) {
    EXPECT_EQ(v, 1.0);
  }
  EXPECT_EQ(r.aggregate.sample_id, "mean");
}

TEST(Report, ThreadCountDoesNotChangeOutput) {
  std::mt19937_64 rng(9);
  std::vector<EvalItem> items;
  for (int k = 0; k < 20; ++k) {
    const auto gt = random_binary(rng, 16, 16, 0.3);
    items.push_back({"id" + std::to_string(19 - k), random_prob(rng, 16, 16), gt});
  }
  std::ostringstream a, b;
  evaluate_dataset(items, {}, 1).write_csv(a);
  evaluate_dataset(items, {}, 4).write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  const auto r = evaluate_dataset(items, {}, 3);
  ASSERT_EQ(r.per_sample.size(), 20u);
  EXPECT_TRUE(std::is_sorted(r.per_sample.begin(), r.per_sample.end(),
                             [](const auto& x, const auto& y) { return x.sample_id < y.sample_id; }));
}

TEST(Report, CsvLayoutAndJsonRoundTrip) {
  BinaryMap gt(2, 2, std::vector<uint8_t>{1, 0, 0, 1});
  std::vector<EvalItem> items{{"a", to_prob(gt), gt}};
  const auto r = evaluate_dataset(items, {}, 1);
  std::ostringstream os;
  r.write_csv(os);
  EXPECT_EQ(os.str(),
            "sample_id,dice,iou,sen,f_beta,f_beta_w,s_alpha,e_phi_mn\n"
            "a,1.0000000000,1.0000000000,1.0000000000,1.0000000000,1.0000000000,1.0000000000,"
            "1.0000000000\n"
            "mean,1.0000000000,1.0000000000,1.0000000000,1.0000000000,1.0000000000,1.0000000000,"
            "1.0000000000\n");
  const auto back = MetricReport::from_json(r.to_json());
  ASSERT_EQ(back.per_sample.size(), 1u);
  EXPECT_EQ(back.per_sample[0].sample_id, "a");
  EXPECT_EQ(back.aggregate.dice, 1.0);

  std::ostringstream summary;
  write_summary_csv(summary, {{"run", r}});
  EXPECT_EQ(summary.str().substr(0, summary.str().find('\n')),
            "name,samples,dice,iou,sen,f_beta,f_beta_w,s_alpha,e_phi_mn");
}

TEST(Report, UnweightedMean) {
  BinaryMap gt(1, 2, std::vector<uint8_t>{1, 0});
  ProbMap good(1, 2, std::vector<double>{1.0, 0.0});
  ProbMap bad(1, 2, std::vector<double>{0.0, 1.0});
  const auto r = evaluate_dataset({{"a", good, gt}, {"b", bad, gt}}, {}, 1);
  EXPECT_DOUBLE_EQ(r.aggregate.dice, 0.5);
}
