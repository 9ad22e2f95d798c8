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

// Deterministic synthetic street scenes for segmentation experiments.
//
// Scenes are painted back to front (sky/ground, road, buildings, cars,
// persons), so the label map is the true occlusion order. All geometry is
// integer arithmetic on a splitmix64 stream derived from (seed, index);
// colors get per-instance jitter plus additive noise with sigma 8, and the
// final image is quantized to integers in [0, 255].

#ifndef SEGADV_SCENEGEN_HPP_
#define SEGADV_SCENEGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "segadv/segnet.hpp"
#include "segadv/tensor.hpp"

namespace segadv {

enum SceneClass : std::uint8_t {
  kBackground = 0,
  kRoad = 1,
  kBuilding = 2,
  kCar = 3,
  kPerson = 4,
};

inline constexpr std::size_t kSceneClassCount = 5;

const char* scene_class_name(std::uint8_t label);

struct CountRange {
  int min = 0;
  int max = 0;
};

struct SceneConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  std::uint64_t rng_seed = 7;
  CountRange buildings{1, 4};
  CountRange cars{0, 3};
  CountRange persons{1, 4};
  double noise_sigma = 8.0;
};

// Throws DimensionError for extents not divisible by 4 or smaller than 16,
// Error for inverted or negative count ranges (persons.min must be >= 1).
void validate(const SceneConfig& config);

struct Scene {
  Tensor image;     // 3 x H x W, integer values in [0, 255]
  LabelMap labels;  // H x W, classes in [0, 5)
  std::uint64_t seed = 0;
  std::size_t index = 0;
};

// Pure function of (config, index). Every scene contains at least one
// person pixel; the generator redraws until it does.
Scene generate(const SceneConfig& config, std::size_t index);

enum class Split { kTrain, kVal };

// index % 5 == 0 -> val, otherwise train.
Split split_for_index(std::size_t index);
std::string to_string(Split split);
Split parse_split(const std::string& text);

// Scenes [0, count) whose split matches, as training examples with ids
// "scene_NNNNN".
std::vector<Example> generate_examples(const SceneConfig& config,
                                       std::size_t count, Split split);

std::string scene_id(std::size_t index);

}  // namespace segadv

#endif  // SEGADV_SCENEGEN_HPP_
