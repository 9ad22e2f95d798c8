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

#ifndef SEGADV_TENSOR_HPP_
#define SEGADV_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "segadv/error.hpp"

namespace segadv {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape);

// Dense row-major array. Feature maps are C x H x W, kernels are
// Cout x Cin x kh x kw. The float instantiation is the production path;
// the double one exists for gradient verification.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), data_(shape_volume(shape_), fill) {
    check_extents();
  }

  BasicTensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents();
    if (data_.size() != shape_volume(shape_)) {
      throw DimensionError("tensor data length " +
                           std::to_string(data_.size()) +
                           " does not match shape " + shape_to_string(shape_));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  const T& at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool all_finite() const {
    for (const T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  void check_extents() const {
    for (std::size_t axis = 0; axis < shape_.size(); ++axis) {
      if (shape_[axis] == 0) {
        throw DimensionError("tensor extent of axis " + std::to_string(axis) +
                             " is zero in shape " + shape_to_string(shape_));
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

// Row-major H x W grid of small integers. The tag keeps label maps and
// masks from being mixed up.
template <typename Tag>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, std::uint8_t fill = 0)
      : height_(height), width_(width), cells_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<std::uint8_t> cells)
      : height_(height), width_(width), cells_(std::move(cells)) {
    if (cells_.size() != height_ * width_) {
      throw DimensionError("grid data length " + std::to_string(cells_.size()) +
                           " does not match " + std::to_string(height_) + "x" +
                           std::to_string(width_));
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return cells_.size(); }

  std::uint8_t& operator[](std::size_t i) { return cells_[i]; }
  std::uint8_t operator[](std::size_t i) const { return cells_[i]; }
  std::uint8_t& at(std::size_t y, std::size_t x) { return cells_[y * width_ + x]; }
  std::uint8_t at(std::size_t y, std::size_t x) const {
    return cells_[y * width_ + x];
  }

  std::span<std::uint8_t> cells() { return cells_; }
  std::span<const std::uint8_t> cells() const { return cells_; }

  bool same_extent(std::size_t height, std::size_t width) const {
    return height_ == height && width_ == width;
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> cells_;
};

struct LabelTag {};
struct MaskTag {};

// Per-pixel class indices.
using LabelMap = Grid<LabelTag>;
// Per-pixel booleans stored as 0/1.
using Mask = Grid<MaskTag>;

// Throws LabelRangeError naming the first pixel whose label is >= num_classes.
void check_label_range(const LabelMap& labels, std::size_t num_classes,
                       const char* context);

}  // namespace segadv

#endif  // SEGADV_TENSOR_HPP_
