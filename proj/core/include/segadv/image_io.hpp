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

// PNG I/O. Images are 8-bit RGB; label maps are 8-bit grayscale where the
// pixel value is the class index. Readers reject any other bit depth or
// colour type. Label values are not range-checked here; consumers that know
// the class count do that.

#ifndef SEGADV_IMAGE_IO_HPP_
#define SEGADV_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "segadv/tensor.hpp"

namespace segadv {

// Clamp to [0, 255], then round half away from zero.
std::uint8_t quantize_pixel(float value);

// Rounds every element with quantize_pixel; the result holds integers.
Tensor quantize_image(const Tensor& image);

void write_image_png(const Tensor& image, const std::filesystem::path& path);
Tensor read_image_png(const std::filesystem::path& path);

void write_labels_png(const LabelMap& labels, const std::filesystem::path& path);
LabelMap read_labels_png(const std::filesystem::path& path);

// Raw interleaved RGB8 buffer (height * width * 3 bytes).
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;
};

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);
RgbImage to_rgb(const Tensor& image);

}  // namespace segadv

#endif  // SEGADV_IMAGE_IO_HPP_
