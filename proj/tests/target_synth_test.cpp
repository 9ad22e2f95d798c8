/* Copyright 2026 The segadv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include "segadv/target_synth.hpp"

#include <gtest/gtest.h>

#include <random>

namespace segadv {
namespace {

LabelMap row(std::vector<std::uint8_t> cells) {
  const std::size_t w = cells.size();
  return LabelMap(1, w, std::move(cells));
}

// O(N^2) scan: nearest non-c pixel by squared distance, smallest class on ties.
LabelMap brute_force_target(const LabelMap& pred, std::uint8_t c) {
  LabelMap out = pred;
  const auto h = static_cast<std::int64_t>(pred.height());
  const auto w = static_cast<std::int64_t>(pred.width());
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      if (pred.at(y, x) != c) continue;
      std::int64_t best = INT64_MAX;
      int best_class = 256;
      for (std::int64_t v = 0; v < h; ++v) {
        for (std::int64_t u = 0; u < w; ++u) {
          const std::uint8_t k = pred.at(v, u);
          if (k == c) continue;
          const std::int64_t d = (y - v) * (y - v) + (x - u) * (x - u);
          if (d < best || (d == best && k < best_class)) {
            best = d;
            best_class = k;
          }
        }
      }
      out.at(y, x) = static_cast<std::uint8_t>(best_class);
    }
  }
  return out;
}

LabelMap random_map(std::size_t h, std::size_t w, std::uint8_t c,
                    double c_fraction, std::mt19937_64& rng) {
  std::bernoulli_distribution is_c(c_fraction);
  std::uniform_int_distribution<int> other(0, 3);
  LabelMap m(h, w);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = is_c(rng) ? c : static_cast<std::uint8_t>(other(rng));
  }
  if (std::all_of(m.cells().begin(), m.cells().end(),
                  [c](std::uint8_t v) { return v == c; })) {
    m[0] = c == 0 ? 1 : 0;
  }
  return m;
}

TEST(SynthesizeTargetTest, UniqueNearestClass) {
  EXPECT_EQ(synthesize_target(row({1, 4, 1}), 4), row({1, 1, 1}));
}

TEST(SynthesizeTargetTest, IsolatedCenterPixel) {
  LabelMap m(3, 3, 0);
  m.at(1, 1) = 4;
  EXPECT_EQ(synthesize_target(m, 4), LabelMap(3, 3, 0));
}

TEST(SynthesizeTargetTest, TieGoesToSmallestClass) {
  EXPECT_EQ(synthesize_target(row({1, 4, 2}), 4), row({1, 1, 2}));
  EXPECT_EQ(synthesize_target(row({2, 4, 1}), 4), row({2, 1, 1}));
}

TEST(SynthesizeTargetTest, EuclideanNotChamfer) {
  // From (0,0): class 1 at (0,3) is 3 away, class 2 at (2,2) is sqrt(8) away.
  LabelMap m(3, 4, 4);
  m.at(0, 3) = 1;
  m.at(2, 2) = 2;
  EXPECT_EQ(synthesize_target(m, 4).at(0, 0), 2);
}

TEST(SynthesizeTargetTest, AllClassCIsAnError) {
  EXPECT_THROW(synthesize_target(LabelMap(4, 4, 4), 4), NoBackgroundClassError);
}

TEST(SynthesizeTargetTest, SpecOverload) {
  const TargetSpec spec{4, row({1, 4, 1})};
  EXPECT_EQ(synthesize_target(spec), row({1, 1, 1}));
}

TEST(SynthesizeTargetTest, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const std::uint8_t c = static_cast<std::uint8_t>(seed % 4);
    // Dense c gives far sites; sparse c gives many equal-distance ties.
    const double fraction = seed % 3 == 0 ? 0.97 : (seed % 3 == 1 ? 0.6 : 0.25);
    const LabelMap pred = random_map(32, 32, c, fraction, rng);
    ASSERT_EQ(synthesize_target(pred, c), brute_force_target(pred, c))
        << "seed " << seed;
  }
}

TEST(SynthesizeTargetTest, OddShapesMatchOracle) {
  std::mt19937_64 rng(101);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{1, 1}, {1, 17},
                      {17, 1}, {5, 23}, {31, 2}}) {
    const LabelMap pred = random_map(h, w, 4, 0.8, rng);
    if (std::count(pred.cells().begin(), pred.cells().end(), 4) ==
        static_cast<std::ptrdiff_t>(pred.size())) {
      continue;
    }
    EXPECT_EQ(synthesize_target(pred, 4), brute_force_target(pred, 4));
  }
}

TEST(SynthesizeTargetTest, IdempotentAndPreserving) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const LabelMap pred = random_map(24, 24, 3, 0.5, rng);
    const LabelMap once = synthesize_target(pred, 3);
    EXPECT_EQ(synthesize_target(once, 3), once);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      EXPECT_NE(once[i], 3);
      if (pred[i] != 3) EXPECT_EQ(once[i], pred[i]);
    }
  }
}

TEST(DistanceTransformTest, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution site(0.05);
  for (int trial = 0; trial < 20; ++trial) {
    Mask sites(19, 27);
    for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = site(rng);
    const auto d = squared_distance_transform(sites);
    for (std::int64_t y = 0; y < 19; ++y) {
      for (std::int64_t x = 0; x < 27; ++x) {
        std::int64_t best = kNoSite;
        for (std::int64_t v = 0; v < 19; ++v) {
          for (std::int64_t u = 0; u < 27; ++u) {
            if (sites.at(v, u)) {
              best = std::min(best, (y - v) * (y - v) + (x - u) * (x - u));
            }
          }
        }
        ASSERT_EQ(d[y * 27 + x], best);
      }
    }
  }
}

TEST(DistanceTransformTest, NoSites) {
  const auto d = squared_distance_transform(Mask(3, 3));
  EXPECT_TRUE(std::all_of(d.begin(), d.end(),
                          [](std::int64_t v) { return v == kNoSite; }));
}

TEST(ExtractMaskTest, Examples) {
  EXPECT_EQ(extract_mask(LabelMap(3, 2, 4), 4), Mask(3, 2, 1));
  EXPECT_EQ(extract_mask(LabelMap(3, 2, 1), 4), Mask(3, 2, 0));
  std::mt19937_64 rng(5);
  const LabelMap pred = random_map(16, 16, 4, 0.3, rng);
  const Mask mask = extract_mask(pred, 4);
  EXPECT_EQ(std::count(mask.cells().begin(), mask.cells().end(), 1),
            std::count(pred.cells().begin(), pred.cells().end(), 4));
  for (std::size_t i = 0; i < pred.size(); ++i) EXPECT_EQ(mask[i], pred[i] == 4);
}

}  // namespace
}  // namespace segadv
