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

#ifndef SEGADV_TARGET_SYNTH_HPP_
#define SEGADV_TARGET_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "segadv/tensor.hpp"

namespace segadv {

struct TargetSpec {
  std::uint8_t class_c = 0;  // class to erase
  LabelMap source;           // the network's prediction on the clean image
};

// Every pixel predicted as class_c takes the label of its nearest pixel
// (exact Euclidean distance between pixel centers) whose label is not
// class_c. At equal distance the smallest class index wins. All other pixels
// keep their label. Throws NoBackgroundClassError when every pixel is
// class_c.
LabelMap synthesize_target(const LabelMap& pred, std::uint8_t class_c);
LabelMap synthesize_target(const TargetSpec& spec);

// mask[i] = (pred[i] == class_c)
Mask extract_mask(const LabelMap& pred, std::uint8_t class_c);

// Exact squared Euclidean distance from each pixel to the nearest pixel with
// sites[i] != 0; kNoSite where the map has no sites. Separable lower-envelope
// transform, O(H * W).
inline constexpr std::int64_t kNoSite = INT64_MAX;
std::vector<std::int64_t> squared_distance_transform(const Mask& sites);

}  // namespace segadv

#endif  // SEGADV_TARGET_SYNTH_HPP_
