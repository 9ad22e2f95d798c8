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

#include "segadv/image_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

namespace segadv {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png(const std::filesystem::path& path, std::size_t height,
               std::size_t width, std::uint32_t format,
               const std::uint8_t* pixels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG '" + path.string() + "': " + message);
  }
}

struct DecodedPng {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> pixels;
};

struct ReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadState() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

// Reads an 8-bit PNG whose colour type must equal `color_type`. Returns false
// with `error` set on any libpng failure; the caller turns that into an
// exception outside the setjmp frame.
bool decode_strict(std::FILE* file, int color_type, DecodedPng& out,
                   std::string& error) {
  ReadState state;
  std::vector<png_bytep> rows;
  state.png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!state.png) {
    error = "libpng initialization failed";
    return false;
  }
  state.info = png_create_info_struct(state.png);
  if (!state.info) {
    error = "libpng initialization failed";
    return false;
  }
  if (setjmp(png_jmpbuf(state.png))) {
    error = "corrupt PNG data";
    return false;
  }
  png_init_io(state.png, file);
  png_read_info(state.png, state.info);
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, actual_type = 0;
  png_get_IHDR(state.png, state.info, &width, &height, &bit_depth, &actual_type,
               nullptr, nullptr, nullptr);
  if (bit_depth != 8 || actual_type != color_type) {
    error = "expected 8-bit " +
            std::string(color_type == PNG_COLOR_TYPE_RGB ? "RGB" : "grayscale") +
            " PNG, got bit depth " + std::to_string(bit_depth) +
            " colour type " + std::to_string(actual_type);
    return false;
  }
  out.height = height;
  out.width = width;
  out.channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  out.pixels.resize(out.height * out.width * out.channels);
  rows.resize(out.height);
  for (std::size_t y = 0; y < out.height; ++y) {
    rows[y] = out.pixels.data() + y * out.width * out.channels;
  }
  png_read_image(state.png, rows.data());
  png_read_end(state.png, nullptr);
  return true;
}

DecodedPng read_png(const std::filesystem::path& path, int color_type) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open PNG '" + path.string() + "'");
  png_byte signature[8];
  if (std::fread(signature, 1, sizeof signature, file.get()) !=
          sizeof signature ||
      png_sig_cmp(signature, 0, sizeof signature) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }
  std::rewind(file.get());
  DecodedPng decoded;
  std::string error;
  if (!decode_strict(file.get(), color_type, decoded, error)) {
    throw FormatError("'" + path.string() + "': " + error);
  }
  return decoded;
}

}  // namespace

std::uint8_t quantize_pixel(float value) {
  if (!(value > 0.0f)) return 0;  // also maps NaN to 0
  if (value >= 255.0f) return 255;
  return static_cast<std::uint8_t>(std::round(value));
}

Tensor quantize_image(const Tensor& image) {
  Tensor out = image;
  for (float& v : out.data()) v = quantize_pixel(v);
  return out;
}

RgbImage to_rgb(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw DimensionError("expected a 3 x H x W image, got " +
                         shape_to_string(image.shape()));
  }
  RgbImage rgb;
  rgb.height = image.dim(1);
  rgb.width = image.dim(2);
  rgb.pixels.resize(rgb.height * rgb.width * 3);
  for (std::size_t y = 0; y < rgb.height; ++y) {
    for (std::size_t x = 0; x < rgb.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        rgb.pixels[(y * rgb.width + x) * 3 + c] = quantize_pixel(image.at(c, y, x));
      }
    }
  }
  return rgb;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.pixels.size() != image.height * image.width * 3) {
    throw DimensionError("RGB buffer size does not match its extents");
  }
  write_png(path, image.height, image.width, PNG_FORMAT_RGB, image.pixels.data());
}

void write_image_png(const Tensor& image, const std::filesystem::path& path) {
  write_rgb_png(to_rgb(image), path);
}

Tensor read_image_png(const std::filesystem::path& path) {
  const DecodedPng png = read_png(path, PNG_COLOR_TYPE_RGB);
  Tensor image({3, png.height, png.width});
  for (std::size_t y = 0; y < png.height; ++y) {
    for (std::size_t x = 0; x < png.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        image.at(c, y, x) = png.pixels[(y * png.width + x) * 3 + c];
      }
    }
  }
  return image;
}

void write_labels_png(const LabelMap& labels, const std::filesystem::path& path) {
  write_png(path, labels.height(), labels.width(), PNG_FORMAT_GRAY,
            labels.cells().data());
}

LabelMap read_labels_png(const std::filesystem::path& path) {
  DecodedPng png = read_png(path, PNG_COLOR_TYPE_GRAY);
  return LabelMap(png.height, png.width, std::move(png.pixels));
}

}  // namespace segadv
