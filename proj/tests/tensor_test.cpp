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


#include "segadv/tensor.hpp"

#include <gtest/gtest.h>

#include <limits>

namespace segadv {
namespace {

TEST(TensorTest, ShapeAndLayout) {
  Tensor t({2, 3, 4});
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(t.size(), 24u);
  t.at(1, 2, 3) = 9.0f;
  EXPECT_EQ(t[(1 * 3 + 2) * 4 + 3], 9.0f);
  EXPECT_EQ(shape_to_string(t.shape()), "[2,3,4]");
}

TEST(TensorTest, RejectsZeroExtentAndLengthMismatch) {
  EXPECT_THROW(Tensor({2, 0, 3}), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>(3)), DimensionError);
}

TEST(TensorTest, WideningCastIsExact) {
  const Tensor t({3}, std::vector<float>{0.1f, -2.5f, 1e-30f});
  const TensorD d = t.cast<double>();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(d[i], static_cast<double>(t[i]));
  EXPECT_EQ(d.cast<float>(), t);
}

TEST(TensorTest, AllFinite) {
  Tensor t({2}, 1.0f);
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
  t[1] = std::numeric_limits<float>::infinity();
  EXPECT_FALSE(t.all_finite());
}

TEST(GridTest, RowMajorCells) {
  LabelMap g(2, 3, std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5});
  EXPECT_EQ(g.at(1, 0), 3);
  EXPECT_TRUE(g.same_extent(2, 3));
  EXPECT_FALSE(g.same_extent(3, 2));
  EXPECT_THROW(LabelMap(2, 2, std::vector<std::uint8_t>(3)), DimensionError);
}

TEST(GridTest, LabelRangeCheckReportsFirstOffender) {
  LabelMap g(2, 2, std::vector<std::uint8_t>{0, 1, 5, 9});
  EXPECT_NO_THROW(check_label_range(g, 10, "test"));
  try {
    check_label_range(g, 5, "test");
    FAIL() << "expected LabelRangeError";
  } catch (const LabelRangeError& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.col(), 0u);
    EXPECT_EQ(e.label(), 5u);
  }
}

}  // namespace
}  // namespace segadv
