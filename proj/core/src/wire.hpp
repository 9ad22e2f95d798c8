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

// Tensor <-> JSON helpers shared by the oracle client and responder.

#ifndef SEGADV_SRC_WIRE_HPP_
#define SEGADV_SRC_WIRE_HPP_

#include <bit>
#include <cstring>
#include <json.hpp>

#include "segadv/oracle.hpp"

namespace segadv::wire {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "wire encoding assumes a little-endian host");

inline json encode_f32(const Tensor& t) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(t.data().data());
  return {{"dtype", "f32"},
          {"shape", t.shape()},
          {"data", base64_encode({bytes, t.size() * sizeof(float)})}};
}

inline json encode_u8(const LabelMap& labels) {
  return {{"dtype", "u8"},
          {"shape", {labels.height(), labels.width()}},
          {"data", base64_encode(labels.cells())}};
}

inline Shape read_shape(const json& j, std::size_t rank, const char* what) {
  const Shape shape = j.at("shape").get<Shape>();
  if (shape.size() != rank) {
    throw DimensionError(std::string(what) + " must have rank " +
                         std::to_string(rank) + ", got " +
                         shape_to_string(shape));
  }
  for (std::size_t extent : shape) {
    if (extent == 0 || extent > (1u << 20)) {
      throw DimensionError(std::string(what) + " has invalid extent in shape " +
                           shape_to_string(shape));
    }
  }
  return shape;
}

inline void require_dtype(const json& j, const char* dtype, const char* what) {
  if (j.at("dtype").get<std::string>() != dtype) {
    throw FormatError(std::string(what) + " must have dtype " + dtype);
  }
}

inline Tensor decode_f32(const json& j, const char* what) {
  require_dtype(j, "f32", what);
  Shape shape = read_shape(j, 3, what);
  const std::vector<std::uint8_t> bytes =
      base64_decode(j.at("data").get<std::string>());
  const std::size_t volume = shape_volume(shape);
  if (bytes.size() != volume * sizeof(float)) {
    throw DimensionError(std::string(what) + " carries " +
                         std::to_string(bytes.size()) + " bytes, shape " +
                         shape_to_string(shape) + " needs " +
                         std::to_string(volume * sizeof(float)));
  }
  std::vector<float> data(volume);
  std::memcpy(data.data(), bytes.data(), bytes.size());
  return Tensor(std::move(shape), std::move(data));
}

inline LabelMap decode_u8(const json& j, const char* what) {
  require_dtype(j, "u8", what);
  const Shape shape = read_shape(j, 2, what);
  std::vector<std::uint8_t> bytes =
      base64_decode(j.at("data").get<std::string>());
  if (bytes.size() != shape[0] * shape[1]) {
    throw DimensionError(std::string(what) + " carries " +
                         std::to_string(bytes.size()) + " bytes, shape " +
                         shape_to_string(shape) + " needs " +
                         std::to_string(shape[0] * shape[1]));
  }
  return LabelMap(shape[0], shape[1], std::move(bytes));
}

}  // namespace segadv::wire

#endif  // SEGADV_SRC_WIRE_HPP_
