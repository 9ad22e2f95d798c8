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

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

namespace segadv {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

struct ConvGeometry {
  std::size_t in_channels, in_h, in_w;
  std::size_t out_channels, kh, kw;
  std::size_t out_h, out_w;
  ConvSpec spec;

  std::size_t patch() const { return in_channels * kh * kw; }
  std::size_t out_pixels() const { return out_h * out_w; }
  bool is_pointwise() const {
    return kh == 1 && kw == 1 && spec.stride == 1 && spec.padding == 0;
  }
};

template <typename T>
ConvGeometry check_conv(const BasicTensor<T>& input,
                        const BasicTensor<T>& kernel,
                        const BasicTensor<T>& bias, const ConvSpec& spec) {
  if (spec.stride == 0) throw DimensionError("conv2d: stride must be positive");
  if (input.rank() != 3) {
    throw DimensionError("conv2d: input must be rank 3 (C,H,W), got shape " +
                         shape_to_string(input.shape()));
  }
  if (kernel.rank() != 4) {
    throw DimensionError(
        "conv2d: kernel must be rank 4 (Cout,Cin,kh,kw), got shape " +
        shape_to_string(kernel.shape()));
  }
  if (kernel.dim(1) != input.dim(0)) {
    throw DimensionError("conv2d: kernel axis 1 (in-channels) = " +
                         std::to_string(kernel.dim(1)) +
                         " does not match input axis 0 (channels) = " +
                         std::to_string(input.dim(0)));
  }
  if (bias.rank() != 1 || bias.dim(0) != kernel.dim(0)) {
    throw DimensionError("conv2d: bias axis 0 must equal kernel axis 0 (" +
                         std::to_string(kernel.dim(0)) + "), got shape " +
                         shape_to_string(bias.shape()));
  }
  ConvGeometry g{};
  g.in_channels = input.dim(0);
  g.in_h = input.dim(1);
  g.in_w = input.dim(2);
  g.out_channels = kernel.dim(0);
  g.kh = kernel.dim(2);
  g.kw = kernel.dim(3);
  g.spec = spec;
  g.out_h = conv_output_extent(g.in_h, g.kh, spec, "height (axis 1)");
  g.out_w = conv_output_extent(g.in_w, g.kw, spec, "width (axis 2)");
  return g;
}

template <typename T>
RowMatrix<T> im2col(const BasicTensor<T>& input, const ConvGeometry& g) {
  RowMatrix<T> cols(g.patch(), g.out_pixels());
  const auto pad = static_cast<std::ptrdiff_t>(g.spec.padding);
  const auto stride = static_cast<std::ptrdiff_t>(g.spec.stride);
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  const T* src = input.data().data();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    const T* plane = src + c * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        T* row = cols.data() + ((c * g.kh + ky) * g.kw + kx) * g.out_pixels();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy) * stride + static_cast<std::ptrdiff_t>(ky) - pad;
          T* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= in_h) {
            std::fill(dst, dst + g.out_w, T{0});
            continue;
          }
          const T* line = plane + iy * in_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox) * stride + static_cast<std::ptrdiff_t>(kx) - pad;
            dst[ox] = (ix < 0 || ix >= in_w) ? T{0} : line[ix];
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
void col2im(const RowMatrix<T>& cols, const ConvGeometry& g,
            BasicTensor<T>& out) {
  const auto pad = static_cast<std::ptrdiff_t>(g.spec.padding);
  const auto stride = static_cast<std::ptrdiff_t>(g.spec.stride);
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  T* dst = out.data().data();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    T* plane = dst + c * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const T* row =
            cols.data() + ((c * g.kh + ky) * g.kw + kx) * g.out_pixels();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy) * stride + static_cast<std::ptrdiff_t>(ky) - pad;
          if (iy < 0 || iy >= in_h) continue;
          T* line = plane + iy * in_w;
          const T* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox) * stride + static_cast<std::ptrdiff_t>(kx) - pad;
            if (ix >= 0 && ix < in_w) line[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b,
                        const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": upstream shape " +
                         shape_to_string(b.shape()) +
                         " does not match input shape " +
                         shape_to_string(a.shape()));
  }
}

void require_feature_map(const Shape& shape, const char* op) {
  if (shape.size() != 3) {
    throw DimensionError(std::string(op) +
                         ": expected rank-3 (C,H,W) tensor, got shape " +
                         shape_to_string(shape));
  }
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel,
                               const ConvSpec& spec, const char* axis_name) {
  const std::size_t padded = in + 2 * spec.padding;
  if (kernel == 0 || padded < kernel) {
    throw DimensionError(std::string("conv2d: kernel ") + axis_name + " " +
                         std::to_string(kernel) +
                         " exceeds padded input extent " +
                         std::to_string(padded));
  }
  return (padded - kernel) / spec.stride + 1;
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      const BasicTensor<T>& bias, const ConvSpec& spec) {
  const ConvGeometry g = check_conv(input, kernel, bias, spec);
  BasicTensor<T> out({g.out_channels, g.out_h, g.out_w});
  MatrixMap<T> out_mat(out.data().data(), g.out_channels, g.out_pixels());
  ConstMatrixMap<T> weights(kernel.data().data(), g.out_channels, g.patch());
  if (g.is_pointwise()) {
    ConstMatrixMap<T> in_mat(input.data().data(), g.in_channels, g.out_pixels());
    out_mat.noalias() = weights * in_mat;
  } else {
    const RowMatrix<T> cols = im2col(input, g);
    out_mat.noalias() = weights * cols;
  }
  for (std::size_t o = 0; o < g.out_channels; ++o) {
    out_mat.row(o).array() += bias[o];
  }
  return out;
}

template <typename T>
ConvGrads<T> conv2d_grads(const BasicTensor<T>& input,
                          const BasicTensor<T>& kernel,
                          const BasicTensor<T>& bias, const ConvSpec& spec,
                          const BasicTensor<T>& upstream, ConvGradParts parts) {
  const ConvGeometry g = check_conv(input, kernel, bias, spec);
  const Shape expected{g.out_channels, g.out_h, g.out_w};
  if (upstream.shape() != expected) {
    throw DimensionError("conv2d_grads: upstream shape " +
                         shape_to_string(upstream.shape()) +
                         " does not match conv output shape " +
                         shape_to_string(expected));
  }
  ConstMatrixMap<T> up(upstream.data().data(), g.out_channels, g.out_pixels());
  ConstMatrixMap<T> weights(kernel.data().data(), g.out_channels, g.patch());

  ConvGrads<T> grads;
  grads.input = BasicTensor<T>(input.shape());
  if (g.is_pointwise()) {
    MatrixMap<T> gin(grads.input.data().data(), g.in_channels, g.out_pixels());
    gin.noalias() = weights.transpose() * up;
    if (parts == ConvGradParts::kAll) {
      ConstMatrixMap<T> in_mat(input.data().data(), g.in_channels,
                               g.out_pixels());
      grads.kernel = BasicTensor<T>(kernel.shape());
      MatrixMap<T> gk(grads.kernel.data().data(), g.out_channels, g.patch());
      gk.noalias() = up * in_mat.transpose();
    }
  } else {
    const RowMatrix<T> grad_cols = weights.transpose() * up;
    col2im(grad_cols, g, grads.input);
    if (parts == ConvGradParts::kAll) {
      const RowMatrix<T> cols = im2col(input, g);
      grads.kernel = BasicTensor<T>(kernel.shape());
      MatrixMap<T> gk(grads.kernel.data().data(), g.out_channels, g.patch());
      gk.noalias() = up * cols.transpose();
    }
  }
  if (parts == ConvGradParts::kAll) {
    grads.bias = BasicTensor<T>(bias.shape());
    for (std::size_t o = 0; o < g.out_channels; ++o) {
      grads.bias[o] = up.row(o).sum();
    }
  }
  return grads;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
  BasicTensor<T> out = input;
  for (T& v : out.data()) v = v > T{0} ? v : T{0};
  return out;
}

template <typename T>
BasicTensor<T> relu_grad(const BasicTensor<T>& input,
                         const BasicTensor<T>& upstream) {
  require_same_shape(input, upstream, "relu_grad");
  BasicTensor<T> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    out[i] = input[i] > T{0} ? upstream[i] : T{0};
  }
  return out;
}

namespace {

// For output index o in [0, 2n): the two source taps and their weights.
struct UpsampleTap {
  std::size_t lo, hi;
  double w_lo, w_hi;
};

UpsampleTap upsample_tap(std::size_t o, std::size_t n) {
  const std::size_t i = o / 2;
  if (o % 2 == 0) {
    if (i == 0) return {0, 0, 1.0, 0.0};
    return {i - 1, i, 0.25, 0.75};
  }
  if (i + 1 >= n) return {n - 1, n - 1, 1.0, 0.0};
  return {i, i + 1, 0.75, 0.25};
}

}  // namespace

template <typename T>
BasicTensor<T> upsample2x(const BasicTensor<T>& input) {
  require_feature_map(input.shape(), "upsample2x");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  BasicTensor<T> out({c, 2 * h, 2 * w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < 2 * h; ++oy) {
      const UpsampleTap ty = upsample_tap(oy, h);
      for (std::size_t ox = 0; ox < 2 * w; ++ox) {
        const UpsampleTap tx = upsample_tap(ox, w);
        const T top = static_cast<T>(tx.w_lo) * input.at(ch, ty.lo, tx.lo) +
                      static_cast<T>(tx.w_hi) * input.at(ch, ty.lo, tx.hi);
        const T bottom = static_cast<T>(tx.w_lo) * input.at(ch, ty.hi, tx.lo) +
                         static_cast<T>(tx.w_hi) * input.at(ch, ty.hi, tx.hi);
        out.at(ch, oy, ox) =
            static_cast<T>(ty.w_lo) * top + static_cast<T>(ty.w_hi) * bottom;
      }
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> upsample2x_grad(const BasicTensor<T>& upstream) {
  require_feature_map(upstream.shape(), "upsample2x_grad");
  if (upstream.dim(1) % 2 != 0 || upstream.dim(2) % 2 != 0) {
    throw DimensionError("upsample2x_grad: upstream spatial extents must be even, got " +
                         shape_to_string(upstream.shape()));
  }
  const std::size_t c = upstream.dim(0), h = upstream.dim(1) / 2,
                    w = upstream.dim(2) / 2;
  BasicTensor<T> out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < 2 * h; ++oy) {
      const UpsampleTap ty = upsample_tap(oy, h);
      for (std::size_t ox = 0; ox < 2 * w; ++ox) {
        const UpsampleTap tx = upsample_tap(ox, w);
        const T g = upstream.at(ch, oy, ox);
        const T g_top = static_cast<T>(ty.w_lo) * g;
        const T g_bottom = static_cast<T>(ty.w_hi) * g;
        out.at(ch, ty.lo, tx.lo) += static_cast<T>(tx.w_lo) * g_top;
        out.at(ch, ty.lo, tx.hi) += static_cast<T>(tx.w_hi) * g_top;
        out.at(ch, ty.hi, tx.lo) += static_cast<T>(tx.w_lo) * g_bottom;
        out.at(ch, ty.hi, tx.hi) += static_cast<T>(tx.w_hi) * g_bottom;
      }
    }
  }
  return out;
}

template <typename T>
LossAndGrad<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                     const LabelMap& target) {
  require_feature_map(logits.shape(), "softmax_cross_entropy");
  const std::size_t k = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
  if (!target.same_extent(h, w)) {
    throw DimensionError("softmax_cross_entropy: target is " +
                         std::to_string(target.height()) + "x" +
                         std::to_string(target.width()) +
                         " but logits spatial extent is " + std::to_string(h) +
                         "x" + std::to_string(w));
  }
  check_label_range(target, k, "softmax_cross_entropy");

  const std::size_t pixels = h * w;
  const T inv_pixels = T{1} / static_cast<T>(pixels);
  LossAndGrad<T> result;
  result.grad = BasicTensor<T>(logits.shape());
  const T* z = logits.data().data();
  T* g = result.grad.data().data();
  double total = 0.0;
  for (std::size_t p = 0; p < pixels; ++p) {
    T peak = z[p];
    for (std::size_t c = 1; c < k; ++c) peak = std::max(peak, z[c * pixels + p]);
    T denom{0};
    for (std::size_t c = 0; c < k; ++c) {
      const T e = std::exp(z[c * pixels + p] - peak);
      g[c * pixels + p] = e;
      denom += e;
    }
    const std::size_t t = target[p];
    total += static_cast<double>(std::log(denom) + peak - z[t * pixels + p]);
    for (std::size_t c = 0; c < k; ++c) {
      const T prob = g[c * pixels + p] / denom;
      g[c * pixels + p] = (prob - (c == t ? T{1} : T{0})) * inv_pixels;
    }
  }
  result.loss = static_cast<T>(total / static_cast<double>(pixels));
  return result;
}

#define SEGADV_INSTANTIATE_LAYERS(T)                                          \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, \
                                 const BasicTensor<T>&, const ConvSpec&);     \
  template ConvGrads<T> conv2d_grads(                                         \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,    \
      const ConvSpec&, const BasicTensor<T>&, ConvGradParts);                 \
  template BasicTensor<T> relu(const BasicTensor<T>&);                        \
  template BasicTensor<T> relu_grad(const BasicTensor<T>&,                    \
                                    const BasicTensor<T>&);                   \
  template BasicTensor<T> upsample2x(const BasicTensor<T>&);                  \
  template BasicTensor<T> upsample2x_grad(const BasicTensor<T>&);             \
  template LossAndGrad<T> softmax_cross_entropy(const BasicTensor<T>&,        \
                                                const LabelMap&);

SEGADV_INSTANTIATE_LAYERS(float)
SEGADV_INSTANTIATE_LAYERS(double)

#undef SEGADV_INSTANTIATE_LAYERS

}  // namespace segadv
