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

#include "segadv/segnet.hpp"

#include <cmath>
#include <string>

#include "segadv/rng.hpp"

namespace segadv {

const std::vector<LayerDescriptor>& fcn3s_layers() {
  static const std::vector<LayerDescriptor> layers = {
      {"stem", 0, 16, 3, {1, 1}},
      {"a1", 16, 32, 3, {2, 1}},
      {"a2", 32, 32, 3, {1, 1}},
      {"b1", 32, 64, 3, {2, 1}},
      {"b2", 64, 64, 3, {1, 1}},
      {"score_quarter", 64, 0, 1, {1, 0}},
      {"score_half", 32, 0, 1, {1, 0}},
      {"score_full", 16, 0, 1, {1, 0}},
  };
  return layers;
}

std::map<std::string, Shape> fcn3s_param_shapes(std::size_t num_classes) {
  std::map<std::string, Shape> shapes;
  for (const LayerDescriptor& layer : fcn3s_layers()) {
    const std::size_t in = layer.in_channels == 0 ? 3 : layer.in_channels;
    const std::size_t out =
        layer.out_channels == 0 ? num_classes : layer.out_channels;
    shapes[std::string(layer.name) + ".weight"] = {out, in, layer.kernel,
                                                   layer.kernel};
    shapes[std::string(layer.name) + ".bias"] = {out};
  }
  return shapes;
}

void check_model_input(const Shape& image_shape) {
  if (image_shape.size() != 3 || image_shape[0] != 3) {
    throw DimensionError("model input must be 3 x H x W, got " +
                         shape_to_string(image_shape));
  }
  if (image_shape[1] % 4 != 0 || image_shape[2] % 4 != 0) {
    throw DimensionError("model input resolution " +
                         std::to_string(image_shape[1]) + "x" +
                         std::to_string(image_shape[2]) +
                         " is not divisible by 4");
  }
}

template <typename T>
BasicSegModel<T>::BasicSegModel(std::size_t num_classes, ParamMap<T> params)
    : num_classes_(num_classes), params_(std::move(params)) {
  if (num_classes_ < 2 || num_classes_ > 256) {
    throw DimensionError("num_classes must be in [2, 256], got " +
                         std::to_string(num_classes_));
  }
  const auto shapes = fcn3s_param_shapes(num_classes_);
  if (params_.size() != shapes.size()) {
    throw DimensionError("model expects " + std::to_string(shapes.size()) +
                         " parameter tensors, got " +
                         std::to_string(params_.size()));
  }
  for (const auto& [name, shape] : shapes) {
    const auto it = params_.find(name);
    if (it == params_.end()) {
      throw DimensionError("model parameter '" + name + "' is missing");
    }
    if (it->second.shape() != shape) {
      throw DimensionError("model parameter '" + name + "' has shape " +
                           shape_to_string(it->second.shape()) +
                           ", architecture requires " + shape_to_string(shape));
    }
  }
}

template <typename T>
BasicSegModel<T> BasicSegModel<T>::initialize(std::size_t num_classes,
                                              std::uint64_t seed) {
  SplitMix64 rng(seed);
  ParamMap<T> params;
  // Draw in layer-table order so the stream does not depend on map ordering.
  for (const LayerDescriptor& layer : fcn3s_layers()) {
    const std::size_t in = layer.in_channels == 0 ? 3 : layer.in_channels;
    const std::size_t out =
        layer.out_channels == 0 ? num_classes : layer.out_channels;
    const double fan_in = static_cast<double>(in * layer.kernel * layer.kernel);
    const double bound = std::sqrt(6.0 / fan_in);
    BasicTensor<T> weight({out, in, layer.kernel, layer.kernel});
    for (T& v : weight.data()) {
      v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
    }
    params.emplace(std::string(layer.name) + ".weight", std::move(weight));
    params.emplace(std::string(layer.name) + ".bias", BasicTensor<T>({out}));
  }
  return BasicSegModel(num_classes, std::move(params));
}

template <typename T>
std::size_t BasicSegModel<T>::parameter_count() const {
  std::size_t count = 0;
  for (const auto& [name, tensor] : params_) count += tensor.size();
  return count;
}

template <typename T>
const BasicTensor<T>& BasicSegModel<T>::param(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) {
    throw DimensionError("unknown model parameter '" + name + "'");
  }
  return it->second;
}

namespace {

template <typename T>
struct Activations {
  BasicTensor<T> input;  // normalized to [0, 1]
  BasicTensor<T> stem_pre, stem;
  BasicTensor<T> a1_pre, a1;
  BasicTensor<T> a2_pre, a2;
  BasicTensor<T> b1_pre, b1;
  BasicTensor<T> b2_pre, b2;
  BasicTensor<T> logits;
};

template <typename T>
BasicTensor<T> apply_conv(const BasicSegModel<T>& model, const std::string& name,
                          const BasicTensor<T>& input, const ConvSpec& spec) {
  return conv2d(input, model.param(name + ".weight"),
                model.param(name + ".bias"), spec);
}

constexpr ConvSpec kSame{1, 1};
constexpr ConvSpec kDown{2, 1};
constexpr ConvSpec kPointwise{1, 0};

template <typename T>
void add_in_place(BasicTensor<T>& dst, const BasicTensor<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
Activations<T> run_forward(const BasicSegModel<T>& model,
                           const BasicTensor<T>& image) {
  check_model_input(image.shape());
  Activations<T> act;
  act.input = image;
  const T scale = T{1} / T{255};
  for (T& v : act.input.data()) v *= scale;

  act.stem_pre = apply_conv(model, "stem", act.input, kSame);
  act.stem = relu(act.stem_pre);
  act.a1_pre = apply_conv(model, "a1", act.stem, kDown);
  act.a1 = relu(act.a1_pre);
  act.a2_pre = apply_conv(model, "a2", act.a1, kSame);
  act.a2 = relu(act.a2_pre);
  act.b1_pre = apply_conv(model, "b1", act.a2, kDown);
  act.b1 = relu(act.b1_pre);
  act.b2_pre = apply_conv(model, "b2", act.b1, kSame);
  act.b2 = relu(act.b2_pre);

  BasicTensor<T> half = apply_conv(model, "score_half", act.a2, kPointwise);
  add_in_place(half,
               upsample2x(apply_conv(model, "score_quarter", act.b2, kPointwise)));
  act.logits = apply_conv(model, "score_full", act.stem, kPointwise);
  add_in_place(act.logits, upsample2x(half));
  return act;
}

template <typename T>
struct Backward {
  BasicTensor<T> input_grad;
  ParamMap<T> param_grads;
};

template <typename T>
Backward<T> run_backward(const BasicSegModel<T>& model,
                         const Activations<T>& act,
                         const BasicTensor<T>& grad_logits,
                         ConvGradParts parts) {
  Backward<T> out;
  auto conv_back = [&](const std::string& name, const BasicTensor<T>& input,
                       const ConvSpec& spec, const BasicTensor<T>& upstream) {
    ConvGrads<T> g =
        conv2d_grads(input, model.param(name + ".weight"),
                     model.param(name + ".bias"), spec, upstream, parts);
    if (parts == ConvGradParts::kAll) {
      out.param_grads[name + ".weight"] = std::move(g.kernel);
      out.param_grads[name + ".bias"] = std::move(g.bias);
    }
    return std::move(g.input);
  };

  // logits = score_full(stem) + up(half); half = score_half(a2) + up(quarter)
  const BasicTensor<T> grad_half = upsample2x_grad(grad_logits);
  const BasicTensor<T> grad_quarter = upsample2x_grad(grad_half);

  BasicTensor<T> grad_stem =
      conv_back("score_full", act.stem, kPointwise, grad_logits);
  BasicTensor<T> grad_a2 = conv_back("score_half", act.a2, kPointwise, grad_half);
  BasicTensor<T> grad_b2 =
      conv_back("score_quarter", act.b2, kPointwise, grad_quarter);

  BasicTensor<T> grad_b1 =
      conv_back("b2", act.b1, kSame, relu_grad(act.b2_pre, grad_b2));
  add_in_place(grad_a2,
               conv_back("b1", act.a2, kDown, relu_grad(act.b1_pre, grad_b1)));
  BasicTensor<T> grad_a1 =
      conv_back("a2", act.a1, kSame, relu_grad(act.a2_pre, grad_a2));
  add_in_place(grad_stem,
               conv_back("a1", act.stem, kDown, relu_grad(act.a1_pre, grad_a1)));
  out.input_grad =
      conv_back("stem", act.input, kSame, relu_grad(act.stem_pre, grad_stem));

  const T scale = T{1} / T{255};
  for (T& v : out.input_grad.data()) v *= scale;
  return out;
}

}  // namespace

template <typename T>
BasicTensor<T> forward_logits(const BasicSegModel<T>& model,
                              const BasicTensor<T>& image) {
  return run_forward(model, image).logits;
}

template <typename T>
LabelMap argmax_labels(const BasicTensor<T>& logits) {
  if (logits.rank() != 3) {
    throw DimensionError("argmax_labels: expected K x H x W logits, got " +
                         shape_to_string(logits.shape()));
  }
  const std::size_t k = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
  const std::size_t pixels = h * w;
  LabelMap labels(h, w);
  for (std::size_t p = 0; p < pixels; ++p) {
    std::size_t best = 0;
    T best_value = logits[p];
    for (std::size_t c = 1; c < k; ++c) {
      const T v = logits[c * pixels + p];
      if (v > best_value) {
        best_value = v;
        best = c;
      }
    }
    labels[p] = static_cast<std::uint8_t>(best);
  }
  return labels;
}

template <typename T>
LabelMap predict_labels(const BasicSegModel<T>& model,
                        const BasicTensor<T>& image) {
  return argmax_labels(forward_logits(model, image));
}

template <typename T>
InputGradient<T> loss_and_input_grad(const BasicSegModel<T>& model,
                                     const BasicTensor<T>& image,
                                     const LabelMap& target) {
  const Activations<T> act = run_forward(model, image);
  LossAndGrad<T> ce = softmax_cross_entropy(act.logits, target);
  Backward<T> back =
      run_backward(model, act, ce.grad, ConvGradParts::kInputOnly);
  return {ce.loss, std::move(back.input_grad)};
}

template <typename T>
ParamGradient<T> loss_and_param_grads(const BasicSegModel<T>& model,
                                      const BasicTensor<T>& image,
                                      const LabelMap& target) {
  const Activations<T> act = run_forward(model, image);
  LossAndGrad<T> ce = softmax_cross_entropy(act.logits, target);
  Backward<T> back = run_backward(model, act, ce.grad, ConvGradParts::kAll);
  return {ce.loss, std::move(back.param_grads)};
}

template class BasicSegModel<float>;
template class BasicSegModel<double>;

#define SEGADV_INSTANTIATE_SEGNET(T)                                          \
  template BasicTensor<T> forward_logits(const BasicSegModel<T>&,             \
                                         const BasicTensor<T>&);              \
  template LabelMap argmax_labels(const BasicTensor<T>&);                     \
  template LabelMap predict_labels(const BasicSegModel<T>&,                   \
                                   const BasicTensor<T>&);                    \
  template InputGradient<T> loss_and_input_grad(                              \
      const BasicSegModel<T>&, const BasicTensor<T>&, const LabelMap&);       \
  template ParamGradient<T> loss_and_param_grads(                             \
      const BasicSegModel<T>&, const BasicTensor<T>&, const LabelMap&);

SEGADV_INSTANTIATE_SEGNET(float)
SEGADV_INSTANTIATE_SEGNET(double)

#undef SEGADV_INSTANTIATE_SEGNET

}  // namespace segadv
