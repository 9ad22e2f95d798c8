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

// Three-scale fully-convolutional segmentation network.
//
//   image / 255
//     -> stem   conv 3x3  3->16, pad 1          + relu   (full res)
//     -> a1     conv 3x3 16->32, stride 2, pad 1 + relu  (1/2)
//     -> a2     conv 3x3 32->32, pad 1          + relu   (1/2)
//     -> b1     conv 3x3 32->64, stride 2, pad 1 + relu  (1/4)
//     -> b2     conv 3x3 64->64, pad 1          + relu   (1/4)
//   score_quarter = conv1x1(b2), score_half = conv1x1(a2),
//   score_full = conv1x1(stem)
//   logits = score_full + up2(score_half + up2(score_quarter))
//
// Inputs are raw 0..255 pixels; H and W must be divisible by 4.

#ifndef SEGADV_SEGNET_HPP_
#define SEGADV_SEGNET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "segadv/layers.hpp"
#include "segadv/tensor.hpp"

namespace segadv {

inline constexpr std::uint32_t kFcn3sArchId = 1;

struct LayerDescriptor {
  const char* name;
  std::size_t in_channels;   // 0 means "input image channels" (3)
  std::size_t out_channels;  // 0 means "num_classes"
  std::size_t kernel;
  ConvSpec spec;
};

// Fixed layer table of the architecture, in forward order.
const std::vector<LayerDescriptor>& fcn3s_layers();

template <typename T>
using ParamMap = std::map<std::string, BasicTensor<T>>;

template <typename T>
class BasicSegModel {
 public:
  BasicSegModel() = default;
  BasicSegModel(std::size_t num_classes, ParamMap<T> params);

  // He-uniform kernels (bound sqrt(6 / fan_in)), zero biases.
  static BasicSegModel initialize(std::size_t num_classes, std::uint64_t seed);

  std::uint32_t arch_id() const { return kFcn3sArchId; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t parameter_count() const;

  const ParamMap<T>& params() const { return params_; }
  ParamMap<T>& mutable_params() { return params_; }
  const BasicTensor<T>& param(const std::string& name) const;

  template <typename U>
  BasicSegModel<U> cast() const {
    ParamMap<U> converted;
    for (const auto& [name, tensor] : params_) {
      converted.emplace(name, tensor.template cast<U>());
    }
    return BasicSegModel<U>(num_classes_, std::move(converted));
  }

  bool operator==(const BasicSegModel&) const = default;

 private:
  std::size_t num_classes_ = 0;
  ParamMap<T> params_;
};

using SegModel = BasicSegModel<float>;
using SegModelD = BasicSegModel<double>;

// Expected shape of every parameter for the given class count.
std::map<std::string, Shape> fcn3s_param_shapes(std::size_t num_classes);

// Throws DimensionError when H or W is not a positive multiple of 4 or the
// image is not 3 x H x W.
void check_model_input(const Shape& image_shape);

template <typename T>
BasicTensor<T> forward_logits(const BasicSegModel<T>& model,
                              const BasicTensor<T>& image);

// Per-pixel argmax; ties go to the smallest class index.
template <typename T>
LabelMap argmax_labels(const BasicTensor<T>& logits);

template <typename T>
LabelMap predict_labels(const BasicSegModel<T>& model,
                        const BasicTensor<T>& image);

template <typename T>
struct InputGradient {
  T loss{};
  BasicTensor<T> grad;  // d loss / d raw pixel, same shape as the image
};

template <typename T>
InputGradient<T> loss_and_input_grad(const BasicSegModel<T>& model,
                                     const BasicTensor<T>& image,
                                     const LabelMap& target);

template <typename T>
struct ParamGradient {
  T loss{};
  ParamMap<T> grads;
};

template <typename T>
ParamGradient<T> loss_and_param_grads(const BasicSegModel<T>& model,
                                      const BasicTensor<T>& image,
                                      const LabelMap& target);

// ---- training ---------------------------------------------------------------

struct Example {
  std::string id;
  Tensor image;     // 3 x H x W, 0..255
  LabelMap labels;  // H x W
};

enum class LrSchedule {
  kConstant,
  kCosine,  // lr * (1 + cos(pi * (epoch - 1) / epochs)) / 2
};

std::string to_string(LrSchedule schedule);
LrSchedule parse_lr_schedule(const std::string& text);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 15;
  std::size_t batch_size = 8;
  std::uint64_t rng_seed = 7;
  LrSchedule schedule = LrSchedule::kConstant;
  // Rescales each batch gradient to at most this global l2 norm; 0 disables.
  double max_grad_norm = 2.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double val_mean_iou = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  double initial_val_mean_iou = 0.0;
  double final_val_mean_iou() const {
    return epochs.empty() ? initial_val_mean_iou : epochs.back().val_mean_iou;
  }
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Learning rate used during `epoch` (1-based).
double epoch_learning_rate(const TrainConfig& config, std::size_t epoch);

// Mini-batch SGD with momentum on the mean pixel cross-entropy. The sample
// order of each epoch is a permutation drawn from rng_seed, so a fixed seed
// gives bitwise-identical parameters. Throws NumericalError on a non-finite
// loss.
TrainLog train(SegModel& model, const std::vector<Example>& train_set,
               const std::vector<Example>& val_set, const TrainConfig& config,
               const EpochCallback& on_epoch = {});

// Dataset-level mean IoU of the model's predictions over `examples`.
double evaluate_mean_iou(const SegModel& model,
                         const std::vector<Example>& examples);

// ---- checkpoint -------------------------------------------------------------
//
// Little-endian binary:
//   "SGV1" | u32 arch_id | u32 num_classes | u32 tensor_count |
//   tensor_count x { u32 name_len | name | u32 rank | u32 extents[rank] |
//                    f32 data[volume] }
// Tensors are written in name order. Doubles are narrowed to f32 on save.

template <typename T>
void save_checkpoint(const BasicSegModel<T>& model,
                     const std::filesystem::path& path);

template <typename T>
BasicSegModel<T> load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_checkpoint(const SegModel& model);
SegModel decode_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace segadv

#endif  // SEGADV_SEGNET_HPP_
