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

#include "segadv/attack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segadv/target_synth.hpp"

namespace segadv {

LabelMap SegNetModel::predict(const Tensor& image) const {
  return predict_labels(model_, image);
}

InputGradient<float> SegNetModel::loss_and_input_grad(
    const Tensor& image, const LabelMap& target) const {
  return segadv::loss_and_input_grad(model_, image, target);
}

std::size_t auto_iterations(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error("auto_iterations: epsilon must be finite and >= 0");
  }
  const double n = std::min(epsilon + 4.0, 1.25 * epsilon);
  return static_cast<std::size_t>(std::floor(n + 0.5));
}

std::size_t AttackConfig::resolved_iterations() const {
  return iterations ? *iterations : auto_iterations(epsilon);
}

void validate(const AttackConfig& config) {
  if (!std::isfinite(config.epsilon) || config.epsilon < 0.0) {
    throw Error("attack epsilon must be finite and >= 0");
  }
  if (!std::isfinite(config.alpha) || config.alpha <= 0.0) {
    throw Error("attack alpha must be finite and > 0");
  }
}

Tensor clip_eps(const Tensor& xi, double epsilon) {
  const auto eps = static_cast<float>(epsilon);
  Tensor out = xi;
  for (float& v : out.data()) v = std::clamp(v, -eps, eps);
  return out;
}

namespace {

void require_image_mask(const Tensor& image, const Mask& mask) {
  if (image.rank() != 3 || !mask.same_extent(image.dim(1), image.dim(2))) {
    throw DimensionError("mask " + std::to_string(mask.height()) + "x" +
                         std::to_string(mask.width()) +
                         " does not match image shape " +
                         shape_to_string(image.shape()));
  }
}

float sign_of(float v) { return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f); }

}  // namespace

Tensor apply_masked(const Tensor& image, const Tensor& xi, const Mask& mask,
                    bool clamp_valid) {
  if (image.shape() != xi.shape()) {
    throw DimensionError("apply_masked: perturbation shape " +
                         shape_to_string(xi.shape()) +
                         " does not match image shape " +
                         shape_to_string(image.shape()));
  }
  require_image_mask(image, mask);
  Tensor out = image;
  const std::size_t pixels = mask.size();
  for (std::size_t c = 0; c < image.dim(0); ++c) {
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!mask[p]) continue;
      const std::size_t i = c * pixels + p;
      float v = image[i] + xi[i];
      if (clamp_valid) v = std::clamp(v, 0.0f, 255.0f);
      out[i] = v;
    }
  }
  return out;
}

AttackResult run_attack(const DifferentiableModel& model, const Tensor& image,
                        const LabelMap& target, const AttackConfig& config,
                        const std::optional<Mask>& mask,
                        const IterationObserver& observer) {
  validate(config);
  if (image.rank() != 3 || !target.same_extent(image.dim(1), image.dim(2))) {
    throw DimensionError("run_attack: target " +
                         std::to_string(target.height()) + "x" +
                         std::to_string(target.width()) +
                         " does not match image shape " +
                         shape_to_string(image.shape()));
  }
  check_label_range(target, model.num_classes(), "run_attack target");

  const auto fail = [](std::size_t iteration, const std::string& what) {
    return AttackAbortedError("attack aborted at iteration " +
                                  std::to_string(iteration) + ": " + what,
                              iteration,
                              AttackAbortedError::Cause::kModelFailure);
  };

  std::optional<Mask> region;
  if (config.mask_mode != MaskMode::kNone) {
    if (mask) {
      region = *mask;
    } else {
      try {
        region = extract_mask(model.predict(image), config.class_c);
      } catch (const Error& e) {
        throw fail(0, e.what());
      }
    }
    require_image_mask(image, *region);
  }

  const std::size_t iterations = config.resolved_iterations();
  const auto eps = static_cast<float>(config.epsilon);
  const auto alpha = static_cast<float>(config.alpha);
  const std::size_t pixels = image.dim(1) * image.dim(2);
  const bool inloop = config.mask_mode == MaskMode::kInloop;

  AttackResult result;
  result.iterations = iterations;
  Tensor xi(image.shape());
  Tensor current = image;

  for (std::size_t it = 1; it <= iterations; ++it) {
    InputGradient<float> g;
    try {
      g = model.loss_and_input_grad(current, target);
    } catch (const AttackAbortedError&) {
      throw;
    } catch (const Error& e) {
      throw fail(it, e.what());
    }
    if (g.grad.shape() != image.shape()) {
      throw fail(it, "gradient shape " + shape_to_string(g.grad.shape()) +
                         " does not match image shape " +
                         shape_to_string(image.shape()));
    }
    if (!std::isfinite(g.loss) || !g.grad.all_finite()) {
      throw AttackAbortedError("attack aborted at iteration " +
                                   std::to_string(it) +
                                   ": non-finite loss or gradient",
                               it,
                               AttackAbortedError::Cause::kNonFiniteGradient);
    }
    result.loss_trace.push_back(g.loss);

    for (std::size_t i = 0; i < xi.size(); ++i) {
      float step = -alpha * sign_of(g.grad[i]);
      if (inloop && !(*region)[i % pixels]) step = 0.0f;
      float v = std::clamp(xi[i] + step, -eps, eps);
      if (config.clamp_valid) {
        const float adv = std::clamp(image[i] + v, 0.0f, 255.0f);
        v = std::clamp(adv - image[i], -eps, eps);
        current[i] = adv;
      } else {
        current[i] = image[i] + v;
      }
      xi[i] = v;
    }
    if (observer) observer(it, xi, current);
  }

  if (config.mask_mode == MaskMode::kPosthoc) {
    result.adversarial_image =
        apply_masked(image, xi, *region, config.clamp_valid);
    for (std::size_t i = 0; i < xi.size(); ++i) {
      if (!(*region)[i % pixels]) xi[i] = 0.0f;
    }
  } else {
    result.adversarial_image = std::move(current);
  }
  result.perturbation = std::move(xi);

  try {
    result.prediction = model.predict(result.adversarial_image);
  } catch (const Error& e) {
    throw fail(iterations, e.what());
  }
  return result;
}

}  // namespace segadv
