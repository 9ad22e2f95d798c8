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

// Iterative targeted sign-gradient attack on segmentation models.
//
//   xi_0 = 0
//   xi_{n+1} = clip_eps( xi_n - alpha * sign( grad_x J(f(x + xi_n), y_target) ) )
//
// with sign(0) = 0. Pixel values and epsilon are in 0..255 units. Optional
// extras: clamping x + xi to the valid pixel range after every step, and
// restricting the perturbation to a mask either inside the loop or after it.

#ifndef SEGADV_ATTACK_HPP_
#define SEGADV_ATTACK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "segadv/metrics.hpp"
#include "segadv/segnet.hpp"
#include "segadv/tensor.hpp"

namespace segadv {

// What the attack needs from a model: predictions and the gradient of the
// mean pixel cross-entropy with respect to raw 0..255 input pixels.
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;

  virtual std::size_t num_classes() const = 0;
  virtual LabelMap predict(const Tensor& image) const = 0;
  virtual InputGradient<float> loss_and_input_grad(
      const Tensor& image, const LabelMap& target) const = 0;
};

// Adapter over an in-process segmentation network. Holds a reference; the
// model must outlive the adapter.
class SegNetModel final : public DifferentiableModel {
 public:
  explicit SegNetModel(const SegModel& model) : model_(model) {}

  std::size_t num_classes() const override { return model_.num_classes(); }
  LabelMap predict(const Tensor& image) const override;
  InputGradient<float> loss_and_input_grad(
      const Tensor& image, const LabelMap& target) const override;

 private:
  const SegModel& model_;
};

struct AttackConfig {
  double epsilon = 10.0;
  double alpha = 1.0;
  // nullopt selects auto_iterations(epsilon).
  std::optional<std::size_t> iterations;
  MaskMode mask_mode = MaskMode::kPosthoc;
  bool clamp_valid = true;
  std::uint8_t class_c = 4;

  std::size_t resolved_iterations() const;
};

// Throws Error when epsilon < 0, alpha <= 0 or either is non-finite.
void validate(const AttackConfig& config);

// round_half_up(min(epsilon + 4, 1.25 * epsilon)); 0 for epsilon = 0.
std::size_t auto_iterations(double epsilon);

// Elementwise clamp into [-epsilon, epsilon].
Tensor clip_eps(const Tensor& xi, double epsilon);

// x + xi * mask (mask broadcast over channels), clamped to [0, 255] when
// clamp_valid. Pixels outside the mask are copied from `image` unchanged.
Tensor apply_masked(const Tensor& image, const Tensor& xi, const Mask& mask,
                    bool clamp_valid = true);

struct AttackResult {
  Tensor perturbation;           // effective xi (masked for posthoc/inloop)
  Tensor adversarial_image;
  std::vector<double> loss_trace;  // loss evaluated at each iteration's input
  LabelMap prediction;           // model prediction on adversarial_image
  std::size_t iterations = 0;
};

// Called after every iteration with (1-based iteration, xi, x + xi).
using IterationObserver =
    std::function<void(std::size_t, const Tensor&, const Tensor&)>;

// Runs the recursion. For posthoc/inloop masking, `mask` selects the pixels
// the perturbation may touch; when absent it is derived from the model's
// prediction on `image` and config.class_c. Model failures and non-finite
// gradients raise AttackAbortedError carrying the iteration index.
AttackResult run_attack(const DifferentiableModel& model, const Tensor& image,
                        const LabelMap& target, const AttackConfig& config,
                        const std::optional<Mask>& mask = std::nullopt,
                        const IterationObserver& observer = {});

}  // namespace segadv

#endif  // SEGADV_ATTACK_HPP_
