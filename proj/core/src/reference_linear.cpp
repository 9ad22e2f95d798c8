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

#include <array>

#include "segadv/layers.hpp"
#include "segadv/oracle.hpp"

namespace segadv {
namespace {

constexpr std::array<std::array<double, 3>, LinearReferenceModel::kClasses>
    kWeights = {{
        {0.020, -0.010, 0.005},
        {-0.015, 0.025, -0.005},
        {0.005, 0.010, -0.020},
        {-0.010, -0.015, 0.030},
        {0.012, 0.004, -0.018},
    }};
constexpr std::array<double, LinearReferenceModel::kClasses> kBias = {
    0.1, -0.2, 0.05, 0.0, -0.1};

void check_image(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("reference model expects a 3 x H x W image, got " +
                         shape_to_string(image.shape()));
  }
}

}  // namespace

double LinearReferenceModel::weight(std::size_t k, std::size_t c) {
  return kWeights.at(k).at(c);
}

double LinearReferenceModel::bias(std::size_t k) { return kBias.at(k); }

Tensor LinearReferenceModel::logits(const Tensor& image) const {
  check_image(image);
  const std::size_t h = image.dim(1), w = image.dim(2), pixels = h * w;
  Tensor out({kClasses, h, w});
  for (std::size_t k = 0; k < kClasses; ++k) {
    const auto w0 = static_cast<float>(kWeights[k][0]);
    const auto w1 = static_cast<float>(kWeights[k][1]);
    const auto w2 = static_cast<float>(kWeights[k][2]);
    const auto b = static_cast<float>(kBias[k]);
    for (std::size_t p = 0; p < pixels; ++p) {
      out[k * pixels + p] = w0 * image[p] + w1 * image[pixels + p] +
                            w2 * image[2 * pixels + p] + b;
    }
  }
  return out;
}

LabelMap LinearReferenceModel::predict(const Tensor& image) const {
  return argmax_labels(logits(image));
}

InputGradient<float> LinearReferenceModel::loss_and_input_grad(
    const Tensor& image, const LabelMap& target) const {
  const LossAndGrad<float> ce = softmax_cross_entropy(logits(image), target);
  const std::size_t pixels = image.dim(1) * image.dim(2);
  InputGradient<float> out{ce.loss, Tensor(image.shape())};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < pixels; ++p) {
      float g = 0.0f;
      for (std::size_t k = 0; k < kClasses; ++k) {
        g += ce.grad[k * pixels + p] * static_cast<float>(kWeights[k][c]);
      }
      out.grad[c * pixels + p] = g;
    }
  }
  return out;
}

}  // namespace segadv
