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


#include "segadv/layers.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

namespace segadv {
namespace {

using ::testing::HasSubstr;
using testing::max_relative_error;
using testing::numeric_gradient;
using testing::random_labels;
using testing::random_tensor;

constexpr int kRandomCases = 50;

TEST(Conv2dTest, IdentityKernelCopiesInput) {
  std::mt19937_64 rng(1);
  const Tensor input = random_tensor<float>({3, 5, 4}, rng);
  Tensor kernel({3, 3, 1, 1});
  for (std::size_t c = 0; c < 3; ++c) kernel[c * 3 + c] = 1.0f;
  const Tensor out = conv2d(input, kernel, Tensor({3}), ConvSpec{});
  EXPECT_EQ(out, input);
}

TEST(Conv2dTest, ZeroInputGivesBias) {
  std::mt19937_64 rng(2);
  const Tensor kernel = random_tensor<float>({4, 2, 3, 3}, rng);
  const Tensor bias({4}, std::vector<float>{0.5f, -1.0f, 2.0f, 0.0f});
  const Tensor out = conv2d(Tensor({2, 6, 6}), kernel, bias, ConvSpec{1, 1});
  ASSERT_EQ(out.shape(), (Shape{4, 6, 6}));
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t p = 0; p < 36; ++p) EXPECT_EQ(out[j * 36 + p], bias[j]);
  }
}

TEST(Conv2dTest, TwoByTwoDiagonal) {
  const Tensor input({1, 2, 2}, std::vector<float>{1, 2, 3, 4});
  const Tensor kernel({1, 1, 2, 2}, std::vector<float>{1, 0, 0, 1});
  const Tensor out = conv2d(input, kernel, Tensor({1}), ConvSpec{});
  ASSERT_EQ(out.shape(), (Shape{1, 1, 1}));
  EXPECT_EQ(out[0], 5.0f);
}

TEST(Conv2dTest, OutputExtentFormula) {
  EXPECT_EQ(conv_output_extent(64, 3, {2, 1}, "height"), 32u);
  EXPECT_EQ(conv_output_extent(7, 3, {1, 0}, "width"), 5u);
  EXPECT_EQ(conv_output_extent(5, 3, {2, 1}, "width"), 3u);
  EXPECT_THROW(conv_output_extent(2, 5, {1, 0}, "height"), DimensionError);
}

TEST(Conv2dTest, ShapeErrorsNameTheAxis) {
  const Tensor input({2, 4, 4});
  try {
    conv2d(input, Tensor({3, 5, 3, 3}), Tensor({3}), ConvSpec{});
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_THAT(e.what(), HasSubstr("in-channels"));
  }
  try {
    conv2d(input, Tensor({3, 2, 3, 3}), Tensor({4}), ConvSpec{});
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_THAT(e.what(), HasSubstr("bias"));
  }
  try {
    conv2d(input, Tensor({3, 2, 6, 3}), Tensor({3}), ConvSpec{});
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_THAT(e.what(), HasSubstr("height"));
  }
}

TEST(Conv2dTest, LinearInInputWithZeroBias) {
  std::mt19937_64 rng(3);
  const Tensor x = random_tensor<float>({3, 8, 8}, rng);
  const Tensor y = random_tensor<float>({3, 8, 8}, rng);
  const Tensor k = random_tensor<float>({5, 3, 3, 3}, rng);
  const float a = 0.7f, b = -1.3f;
  Tensor mix(x.shape());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
  const ConvSpec spec{2, 1};
  const Tensor lhs = conv2d(mix, k, Tensor({5}), spec);
  const Tensor cx = conv2d(x, k, Tensor({5}), spec);
  const Tensor cy = conv2d(y, k, Tensor({5}), spec);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const float rhs = a * cx[i] + b * cy[i];
    EXPECT_NEAR(lhs[i], rhs, 1e-5f * std::max(1.0f, std::abs(rhs)));
  }
}

TEST(Conv2dTest, Deterministic) {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor<float>({4, 12, 12}, rng);
  const Tensor k = random_tensor<float>({6, 4, 3, 3}, rng);
  const Tensor b = random_tensor<float>({6}, rng);
  EXPECT_EQ(conv2d(x, k, b, {1, 1}), conv2d(x, k, b, {1, 1}));
}

TEST(Conv2dGradsTest, IdentityKernelPassesUpstream) {
  Tensor kernel({2, 2, 1, 1});
  kernel[0] = kernel[3] = 1.0f;
  const auto g = conv2d_grads(Tensor({2, 3, 3}), kernel, Tensor({2}),
                              ConvSpec{}, Tensor({2, 3, 3}, 1.0f));
  EXPECT_EQ(g.input, Tensor({2, 3, 3}, 1.0f));
}

TEST(Conv2dGradsTest, ZeroUpstreamGivesZeroGrads) {
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor<float>({2, 6, 6}, rng);
  const Tensor k = random_tensor<float>({3, 2, 3, 3}, rng);
  const auto g = conv2d_grads(x, k, Tensor({3}), ConvSpec{1, 1},
                              Tensor({3, 6, 6}));
  EXPECT_EQ(g.input, Tensor(x.shape()));
  EXPECT_EQ(g.kernel, Tensor(k.shape()));
  EXPECT_EQ(g.bias, Tensor({3}));
}

TEST(Conv2dGradsTest, InputOnlySkipsParameterGrads) {
  std::mt19937_64 rng(6);
  const Tensor x = random_tensor<float>({2, 6, 6}, rng);
  const Tensor k = random_tensor<float>({3, 2, 3, 3}, rng);
  const Tensor up = random_tensor<float>({3, 6, 6}, rng);
  const auto all = conv2d_grads(x, k, Tensor({3}), {1, 1}, up);
  const auto only = conv2d_grads(x, k, Tensor({3}), {1, 1}, up,
                                 ConvGradParts::kInputOnly);
  EXPECT_EQ(only.input, all.input);
  EXPECT_TRUE(only.kernel.empty());
  EXPECT_TRUE(only.bias.empty());
}

TEST(Conv2dGradsTest, RejectsMisshapedUpstream) {
  EXPECT_THROW(conv2d_grads(Tensor({1, 4, 4}), Tensor({1, 1, 3, 3}),
                            Tensor({1}), ConvSpec{}, Tensor({1, 4, 4})),
               DimensionError);
}

// L = <upstream, conv(x, k, b)>; its gradient with respect to x, k and b is
// exactly what conv2d_grads returns.
TEST(Conv2dGradsTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(1, 4);
  for (int trial = 0; trial < kRandomCases; ++trial) {
    const std::size_t cin = pick(rng), cout = pick(rng);
    const std::size_t kh = 1 + 2 * (pick(rng) % 2), kw = 1 + 2 * (pick(rng) % 2);
    const ConvSpec spec{static_cast<std::size_t>(1 + pick(rng) % 2),
                        static_cast<std::size_t>(pick(rng) % 2)};
    const std::size_t h = 3 + pick(rng), w = 3 + pick(rng);
    const TensorD x = random_tensor<double>({cin, h, w}, rng);
    const TensorD k = random_tensor<double>({cout, cin, kh, kw}, rng);
    const TensorD b = random_tensor<double>({cout}, rng);
    const TensorD out = conv2d(x, k, b, spec);
    const TensorD up = random_tensor<double>(out.shape(), rng);
    const auto g = conv2d_grads(x, k, b, spec, up);
    SCOPED_TRACE("trial " + std::to_string(trial));

    const auto fx = [&](const TensorD& v) {
      return testing::dot(up, conv2d(v, k, b, spec));
    };
    const auto fk = [&](const TensorD& v) {
      return testing::dot(up, conv2d(x, v, b, spec));
    };
    const auto fb = [&](const TensorD& v) {
      return testing::dot(up, conv2d(x, k, v, spec));
    };
    EXPECT_LT(max_relative_error(g.input, numeric_gradient(fx, x)), 1e-6);
    EXPECT_LT(max_relative_error(g.kernel, numeric_gradient(fk, k)), 1e-6);
    EXPECT_LT(max_relative_error(g.bias, numeric_gradient(fb, b)), 1e-6);
  }
}

TEST(ReluTest, ClampsNegatives) {
  const Tensor x({3}, std::vector<float>{-1, 0, 2});
  EXPECT_EQ(relu(x), Tensor({3}, std::vector<float>({0, 0, 2})));
}

TEST(ReluTest, SubgradientAtZeroIsZero) {
  const Tensor x({3}, std::vector<float>{-1, 0, 2});
  const Tensor up({3}, std::vector<float>{5, 5, 5});
  EXPECT_EQ(relu_grad(x, up), Tensor({3}, std::vector<float>({0, 0, 5})));
}

TEST(ReluTest, MatchesFiniteDifferencesAwayFromZero) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < kRandomCases; ++trial) {
    TensorD x = random_tensor<double>({2, 4, 5}, rng);
    // Keep inputs at least 1e-3 from the kink.
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(x[i]) < 1e-3) x[i] = 0.5;
    }
    const TensorD up = random_tensor<double>(x.shape(), rng);
    const auto f = [&](const TensorD& v) { return testing::dot(up, relu(v)); };
    EXPECT_LT(max_relative_error(relu_grad(x, up), numeric_gradient(f, x)),
              1e-6)
        << "trial " << trial;
  }
}

TEST(Upsample2xTest, ConstantStaysConstant) {
  const Tensor out = upsample2x(Tensor({2, 3, 5}, 4.25f));
  EXPECT_EQ(out, Tensor({2, 6, 10}, 4.25f));
}

TEST(Upsample2xTest, SinglePixel) {
  EXPECT_EQ(upsample2x(Tensor({1, 1, 1}, 7.0f)), Tensor({1, 2, 2}, 7.0f));
}

TEST(Upsample2xTest, QuarterTapsWithClampedBorders) {
  const Tensor out = upsample2x(Tensor({1, 1, 2}, std::vector<float>{0, 4}));
  // Source coordinates -0.25, 0.25, 0.75, 1.25 clamp to [0, 1].
  EXPECT_EQ(out, Tensor({1, 2, 4}, std::vector<float>({0, 1, 3, 4, 0, 1, 3, 4})));
}

TEST(Upsample2xTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(1, 5);
  for (int trial = 0; trial < kRandomCases; ++trial) {
    const TensorD x = random_tensor<double>(
        {static_cast<std::size_t>(pick(rng)), static_cast<std::size_t>(pick(rng)),
         static_cast<std::size_t>(pick(rng))},
        rng);
    const TensorD up = random_tensor<double>(
        {x.dim(0), 2 * x.dim(1), 2 * x.dim(2)}, rng);
    const auto f = [&](const TensorD& v) {
      return testing::dot(up, upsample2x(v));
    };
    EXPECT_LT(max_relative_error(upsample2x_grad(up), numeric_gradient(f, x)),
              1e-6)
        << "trial " << trial;
  }
}

TEST(Upsample2xTest, GradRejectsOddExtent) {
  EXPECT_THROW(upsample2x_grad(Tensor({1, 3, 4})), DimensionError);
}

TEST(SoftmaxCrossEntropyTest, EqualLogitsGiveLogK) {
  const LossAndGrad<double> r =
      softmax_cross_entropy(TensorD({2, 1, 1}, 0.3), LabelMap(1, 1, 1));
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
  EXPECT_NEAR(r.loss, 0.693147, 1e-6);
}

TEST(SoftmaxCrossEntropyTest, GradSumsToZeroPerPixel) {
  std::mt19937_64 rng(10);
  const TensorD logits = random_tensor<double>({5, 4, 6}, rng, -5, 5);
  const LossAndGrad<double> r =
      softmax_cross_entropy(logits, random_labels(4, 6, 5, rng));
  for (std::size_t p = 0; p < 24; ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 5; ++k) sum += r.grad[k * 24 + p];
    EXPECT_NEAR(sum, 0.0, 1e-15);
  }
}

TEST(SoftmaxCrossEntropyTest, StableForLargeLogits) {
  TensorD logits({2, 1, 2});
  logits[0] = 1000.0;
  logits[1] = -1000.0;
  const LossAndGrad<double> r =
      softmax_cross_entropy(logits, LabelMap(1, 2, std::vector<std::uint8_t>{1, 1}));
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 500.0, 1e-9);  // pixel 0 costs 1000, pixel 1 costs ~0
  EXPECT_TRUE(r.grad.all_finite());
}

TEST(SoftmaxCrossEntropyTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(2, 6);
  for (int trial = 0; trial < kRandomCases; ++trial) {
    const std::size_t k = pick(rng), h = pick(rng), w = pick(rng);
    const TensorD logits = random_tensor<double>({k, h, w}, rng, -3, 3);
    const LabelMap target = random_labels(h, w, k, rng);
    const auto f = [&](const TensorD& v) {
      return softmax_cross_entropy(v, target).loss;
    };
    EXPECT_LT(max_relative_error(softmax_cross_entropy(logits, target).grad,
                                 numeric_gradient(f, logits)),
              1e-6)
        << "trial " << trial;
  }
}

TEST(SoftmaxCrossEntropyTest, OutOfRangeLabelNamesPixel) {
  LabelMap target(2, 3);
  target.at(1, 2) = 7;
  try {
    softmax_cross_entropy(Tensor({3, 2, 3}), target);
    FAIL() << "expected LabelRangeError";
  } catch (const LabelRangeError& e) {
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.col(), 2u);
    EXPECT_EQ(e.label(), 7u);
  }
}

TEST(SoftmaxCrossEntropyTest, RejectsTargetOfWrongExtent) {
  EXPECT_THROW(softmax_cross_entropy(Tensor({3, 2, 3}), LabelMap(3, 2)),
               DimensionError);
}

}  // namespace
}  // namespace segadv
