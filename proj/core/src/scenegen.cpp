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

#include "segadv/scenegen.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "segadv/image_io.hpp"
#include "segadv/rng.hpp"

namespace segadv {
namespace {

using Rgb = std::array<int, 3>;

constexpr std::array<Rgb, 4> kBuildingPalette = {
    {{150, 110, 80}, {172, 150, 120}, {120, 100, 92}, {182, 170, 150}}};
constexpr std::array<Rgb, 4> kCarPalette = {
    {{170, 32, 36}, {36, 56, 160}, {208, 188, 42}, {188, 190, 200}}};
constexpr std::array<Rgb, 4> kClothingPalette = {
    {{128, 96, 112}, {96, 120, 116}, {150, 120, 96}, {108, 100, 130}}};
constexpr Rgb kSkin = {190, 160, 140};

// Label and integer color buffers; painting overwrites both.
class Canvas {
 public:
  Canvas(int height, int width)
      : h_(height),
        w_(width),
        labels_(static_cast<std::size_t>(height * width), kBackground),
        rgb_(static_cast<std::size_t>(3 * height * width), 0) {}

  int height() const { return h_; }
  int width() const { return w_; }

  void paint(int y, int x, std::uint8_t label, const Rgb& color) {
    if (y < 0 || y >= h_ || x < 0 || x >= w_) return;
    const std::size_t p = static_cast<std::size_t>(y * w_ + x);
    labels_[p] = label;
    for (int c = 0; c < 3; ++c) {
      rgb_[static_cast<std::size_t>(c) * labels_.size() + p] = color[c];
    }
  }

  bool has_label(std::uint8_t label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  const std::vector<std::uint8_t>& labels() const { return labels_; }
  const std::vector<int>& rgb() const { return rgb_; }

 private:
  int h_, w_;
  std::vector<std::uint8_t> labels_;
  std::vector<int> rgb_;
};

Rgb jitter(const Rgb& base, SplitMix64& rng, int amount) {
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    out[c] = std::clamp(base[c] + static_cast<int>(rng.range(-amount, amount)),
                        0, 255);
  }
  return out;
}

Rgb shade(const Rgb& color, int num, int den) {
  return {color[0] * num / den, color[1] * num / den, color[2] * num / den};
}

Rgb offset(const Rgb& color, int delta) {
  return {std::clamp(color[0] + delta, 0, 255),
          std::clamp(color[1] + delta, 0, 255),
          std::clamp(color[2] + delta, 0, 255)};
}

// Scales a length given for a 64-pixel reference extent.
int scaled(int value, int extent) { return std::max(1, value * extent / 64); }

void paint_backdrop(Canvas& canvas, SplitMix64& rng, int horizon,
                    int road_top) {
  const int h = canvas.height(), w = canvas.width();
  const Rgb sky = jitter({96, 140, 206}, rng, 14);
  const Rgb ground = jitter({128, 122, 100}, rng, 14);
  for (int y = 0; y < road_top; ++y) {
    for (int x = 0; x < w; ++x) {
      if (y < horizon) {
        canvas.paint(y, x, kBackground, offset(sky, 40 * y / horizon));
      } else {
        const int texture = static_cast<int>(rng.range(-6, 6));
        canvas.paint(y, x, kBackground, offset(ground, texture));
      }
    }
  }
  const Rgb asphalt = jitter({84, 84, 90}, rng, 10);
  const int lane_row = road_top + (h - road_top) / 2;
  const int dash = scaled(6, w);
  const int phase = static_cast<int>(rng.range(0, 2 * dash - 1));
  for (int y = road_top; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool marking =
          (y == lane_row || y == lane_row + 1) && ((x + phase) / dash) % 2 == 0;
      const int texture = static_cast<int>(rng.range(-8, 8));
      canvas.paint(y, x, kRoad,
                   marking ? Rgb{196, 196, 186} : offset(asphalt, texture));
    }
  }
}

void paint_building(Canvas& canvas, SplitMix64& rng, int horizon) {
  const int h = canvas.height(), w = canvas.width();
  const int bw = static_cast<int>(rng.range(scaled(6, w), scaled(18, w)));
  const int max_height = std::max(scaled(8, h) + 1, horizon - 2);
  const int bh = static_cast<int>(rng.range(scaled(8, h), max_height));
  const int x0 = static_cast<int>(rng.range(-bw / 2, w - bw / 2));
  const int bottom = horizon + 1;
  const int top = bottom - bh;
  const Rgb wall = jitter(kBuildingPalette[rng.below(4)], rng, 15);
  const Rgb window = jitter({62, 72, 92}, rng, 10);
  for (int y = top; y <= bottom; ++y) {
    for (int x = x0; x < x0 + bw; ++x) {
      const int ry = y - top, rx = x - x0;
      const bool is_window = ry % 5 >= 2 && ry % 5 <= 3 && rx % 4 >= 1 &&
                             rx % 4 <= 2 && rx < bw - 1 && y < bottom - 1;
      canvas.paint(y, x, kBuilding, is_window ? window : wall);
    }
  }
}

void paint_car(Canvas& canvas, SplitMix64& rng, int road_top) {
  const int h = canvas.height(), w = canvas.width();
  const int cw = static_cast<int>(rng.range(scaled(8, w), scaled(13, w)));
  const int ch = static_cast<int>(rng.range(scaled(5, h), scaled(8, h)));
  const int bottom = static_cast<int>(rng.range(road_top + 2, h - 1));
  const int top = bottom - ch + 1;
  const int x0 = static_cast<int>(rng.range(-cw / 3, w - 2 * cw / 3));
  const Rgb body = jitter(kCarPalette[rng.below(4)], rng, 12);
  const Rgb glass = jitter({58, 70, 82}, rng, 8);
  const Rgb tyre = {26, 26, 28};
  for (int y = top; y <= bottom; ++y) {
    for (int x = x0; x < x0 + cw; ++x) {
      const int ry = y - top, rx = x - x0;
      const bool corner = (ry == 0 || ry == ch - 1) && (rx == 0 || rx == cw - 1);
      if (corner) continue;
      Rgb color = body;
      if (ry < ch / 3 && rx >= 2 && rx < cw - 2) color = glass;
      if (ry == ch - 1 && ((rx >= 1 && rx <= 2) || (rx >= cw - 3 && rx <= cw - 2))) {
        color = tyre;
      }
      canvas.paint(y, x, kCar, color);
    }
  }
}

void paint_person(Canvas& canvas, SplitMix64& rng, int horizon) {
  const int h = canvas.height(), w = canvas.width();
  const int ph = static_cast<int>(rng.range(scaled(10, h), scaled(18, h)));
  const int pw = static_cast<int>(
      rng.range(std::max(3, scaled(4, w)), std::max(3, scaled(7, w))));
  const int foot = static_cast<int>(
      rng.range(std::min(h - 1, horizon + ph / 3), h - 1));
  const int top = foot - ph + 1;
  const int cx = static_cast<int>(rng.range(pw, w - pw - 1));
  const Rgb clothing = jitter(kClothingPalette[rng.below(4)], rng, 15);
  const Rgb skin = jitter(kSkin, rng, 12);
  const Rgb trousers = shade(clothing, 3, 5);

  // Head: ellipse with integer radii.
  const int rx = std::max(1, pw / 2 - 1 + static_cast<int>(pw % 2));
  const int ry = std::max(1, ph / 8);
  const int cy = top + ry;
  for (int y = cy - ry; y <= cy + ry; ++y) {
    for (int x = cx - rx; x <= cx + rx; ++x) {
      const int dx = x - cx, dy = y - cy;
      if (dx * dx * ry * ry + dy * dy * rx * rx <= rx * rx * ry * ry) {
        canvas.paint(y, x, kPerson, skin);
      }
    }
  }
  // Torso and legs.
  const int torso_top = cy + ry + 1;
  const int legs_top = torso_top + (foot - torso_top) / 2;
  const int left = cx - pw / 2;
  for (int y = torso_top; y <= foot; ++y) {
    for (int x = left; x < left + pw; ++x) {
      if (y >= legs_top) {
        const int rx_in = x - left;
        if (pw >= 4 && rx_in == pw / 2 && y > legs_top + 1) continue;
        canvas.paint(y, x, kPerson, trousers);
      } else {
        canvas.paint(y, x, kPerson, clothing);
      }
    }
  }
}

// Approximately normal noise: sum of 12 uniforms minus 6 has unit variance.
double gaussian_like(SplitMix64& rng) {
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += rng.uniform();
  return s - 6.0;
}

}  // namespace

const char* scene_class_name(std::uint8_t label) {
  switch (label) {
    case kBackground:
      return "background";
    case kRoad:
      return "road";
    case kBuilding:
      return "building";
    case kCar:
      return "car";
    case kPerson:
      return "person";
    default:
      return "unknown";
  }
}

void validate(const SceneConfig& config) {
  if (config.height < 16 || config.width < 16 || config.height % 4 != 0 ||
      config.width % 4 != 0) {
    throw DimensionError("scene size " + std::to_string(config.height) + "x" +
                         std::to_string(config.width) +
                         " must be at least 16x16 and divisible by 4");
  }
  for (const CountRange& r : {config.buildings, config.cars, config.persons}) {
    if (r.min < 0 || r.max < r.min) {
      throw Error("invalid object count range [" + std::to_string(r.min) +
                  ", " + std::to_string(r.max) + "]");
    }
  }
  if (config.persons.min < 1) {
    throw Error("scenes need at least one person (persons.min >= 1)");
  }
  if (!(config.noise_sigma >= 0.0)) throw Error("noise_sigma must be >= 0");
}

Scene generate(const SceneConfig& config, std::size_t index) {
  validate(config);
  const int h = static_cast<int>(config.height);
  const int w = static_cast<int>(config.width);
  SplitMix64 rng = SplitMix64::stream(config.rng_seed, index);

  for (;;) {
    Canvas canvas(h, w);
    const int horizon =
        scaled(26, h) + static_cast<int>(rng.range(0, scaled(8, h)));
    const int road_top =
        horizon + static_cast<int>(rng.range(scaled(4, h), scaled(10, h)));
    paint_backdrop(canvas, rng, horizon, road_top);

    const auto count = [&rng](const CountRange& r) {
      return static_cast<int>(rng.range(r.min, r.max));
    };
    for (int i = count(config.buildings); i > 0; --i) {
      paint_building(canvas, rng, horizon);
    }
    for (int i = count(config.cars); i > 0; --i) paint_car(canvas, rng, road_top);
    for (int i = count(config.persons); i > 0; --i) {
      paint_person(canvas, rng, horizon);
    }
    if (!canvas.has_label(kPerson)) continue;

    Scene scene;
    scene.seed = config.rng_seed;
    scene.index = index;
    scene.labels = LabelMap(config.height, config.width, canvas.labels());
    scene.image = Tensor({3, config.height, config.width});
    const auto& rgb = canvas.rgb();
    for (std::size_t i = 0; i < rgb.size(); ++i) {
      const double v = rgb[i] + config.noise_sigma * gaussian_like(rng);
      scene.image[i] = static_cast<float>(quantize_pixel(static_cast<float>(v)));
    }
    return scene;
  }
}

Split split_for_index(std::size_t index) {
  return index % 5 == 0 ? Split::kVal : Split::kTrain;
}

std::string to_string(Split split) {
  return split == Split::kVal ? "val" : "train";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  throw Error("unknown split '" + text + "' (expected train or val)");
}

std::string scene_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05zu", index);
  return buf;
}

std::vector<Example> generate_examples(const SceneConfig& config,
                                       std::size_t count, Split split) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (split_for_index(i) != split) continue;
    Scene s = generate(config, i);
    out.push_back({scene_id(i), std::move(s.image), std::move(s.labels)});
  }
  return out;
}

}  // namespace segadv
