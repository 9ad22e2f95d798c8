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

#include "segadv/tensor.hpp"

namespace segadv {

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void check_label_range(const LabelMap& labels, std::size_t num_classes,
                       const char* context) {
  for (std::size_t y = 0; y < labels.height(); ++y) {
    for (std::size_t x = 0; x < labels.width(); ++x) {
      const unsigned label = labels.at(y, x);
      if (label >= num_classes) {
        throw LabelRangeError(std::string(context) + ": label " +
                                  std::to_string(label) + " at (row " +
                                  std::to_string(y) + ", col " +
                                  std::to_string(x) + ") is outside [0, " +
                                  std::to_string(num_classes) + ")",
                              y, x, label);
      }
    }
  }
}

}  // namespace segadv
