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

// Forward and backward definitions of the layer operations used by the
// segmentation network. Every function is pure; all tensors are C x H x W
// (feature maps) or Cout x Cin x kh x kw (kernels), row-major.

#ifndef SEGADV_LAYERS_HPP_
#define SEGADV_LAYERS_HPP_

#include <cstddef>

#include "segadv/tensor.hpp"

namespace segadv {

struct ConvSpec {
  std::size_t stride = 1;
  std::size_t padding = 0;  // symmetric zero padding
};

// floor((in + 2 * padding - kernel) / stride) + 1; throws DimensionError when
// the result would be < 1.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel,
                               const ConvSpec& spec, const char* axis_name);

// Cross-correlation with zero padding plus per-channel bias.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      const BasicTensor<T>& bias, const ConvSpec& spec);

enum class ConvGradParts { kAll, kInputOnly };

template <typename T>
struct ConvGrads {
  BasicTensor<T> input;
  BasicTensor<T> kernel;  // empty when ConvGradParts::kInputOnly
  BasicTensor<T> bias;    // empty when ConvGradParts::kInputOnly
};

template <typename T>
ConvGrads<T> conv2d_grads(const BasicTensor<T>& input,
                          const BasicTensor<T>& kernel,
                          const BasicTensor<T>& bias, const ConvSpec& spec,
                          const BasicTensor<T>& upstream,
                          ConvGradParts parts = ConvGradParts::kAll);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

// Passes upstream where input > 0; zero where input <= 0 (subgradient 0 at 0).
template <typename T>
BasicTensor<T> relu_grad(const BasicTensor<T>& input,
                         const BasicTensor<T>& upstream);

// Bilinear 2x upsampling, align_corners = false. Output pixel o samples the
// source coordinate (o + 0.5) / 2 - 0.5, clamped to [0, in - 1]. For a factor
// of two this reduces to fixed 0.25 / 0.75 weights between the two nearest
// source pixels, with the outermost output pixels copying the border value.
template <typename T>
BasicTensor<T> upsample2x(const BasicTensor<T>& input);

// Transpose of upsample2x; upstream is C x 2H x 2W, result is C x H x W.
template <typename T>
BasicTensor<T> upsample2x_grad(const BasicTensor<T>& upstream);

template <typename T>
struct LossAndGrad {
  T loss{};
  BasicTensor<T> grad;
};

// Mean over all H * W pixels of -log softmax(logits)[target]. The gradient is
// taken with respect to logits and has the logits' shape.
template <typename T>
LossAndGrad<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                     const LabelMap& target);

}  // namespace segadv

#endif  // SEGADV_LAYERS_HPP_
