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

#include "segadv/target_synth.hpp"

#include <array>
#include <limits>
#include <string>

namespace segadv {
namespace {

// 1-D lower envelope of parabolas (q - p)^2 + f[q] over the finite entries of
// f (Felzenszwalb & Huttenlocher). Values are integers well below 2^53, so
// the double-valued intersections are exact enough to order distinct
// breakpoints; tied breakpoints yield the same minimum either way.
void envelope_1d(std::vector<std::int64_t>& f, std::vector<std::size_t>& hull,
                 std::vector<double>& bounds, std::vector<std::int64_t>& out) {
  const std::size_t n = f.size();
  hull.clear();
  bounds.clear();
  const auto key = [&f](std::size_t q) {
    return static_cast<double>(f[q]) + static_cast<double>(q) * static_cast<double>(q);
  };
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kNoSite) continue;
    for (;;) {
      if (hull.empty()) {
        hull.push_back(q);
        bounds.push_back(-std::numeric_limits<double>::infinity());
        break;
      }
      const std::size_t v = hull.back();
      const double s = (key(q) - key(v)) / (2.0 * static_cast<double>(q) -
                                            2.0 * static_cast<double>(v));
      if (s <= bounds.back()) {
        hull.pop_back();
        bounds.pop_back();
        continue;
      }
      hull.push_back(q);
      bounds.push_back(s);
      break;
    }
  }
  out.assign(n, kNoSite);
  if (hull.empty()) return;
  std::size_t k = 0;
  for (std::size_t p = 0; p < n; ++p) {
    while (k + 1 < hull.size() && bounds[k + 1] < static_cast<double>(p)) ++k;
    const auto d = static_cast<std::int64_t>(p) - static_cast<std::int64_t>(hull[k]);
    out[p] = d * d + f[hull[k]];
  }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(const Mask& sites) {
  const std::size_t h = sites.height(), w = sites.width();
  std::vector<std::int64_t> dist(h * w, kNoSite);
  std::vector<std::int64_t> line, result;
  std::vector<std::size_t> hull;
  std::vector<double> bounds;

  line.resize(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) {
      line[y] = sites.at(y, x) ? 0 : kNoSite;
    }
    envelope_1d(line, hull, bounds, result);
    for (std::size_t y = 0; y < h; ++y) dist[y * w + x] = result[y];
  }
  line.resize(w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) line[x] = dist[y * w + x];
    envelope_1d(line, hull, bounds, result);
    for (std::size_t x = 0; x < w; ++x) dist[y * w + x] = result[x];
  }
  return dist;
}

Mask extract_mask(const LabelMap& pred, std::uint8_t class_c) {
  Mask mask(pred.height(), pred.width());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mask[i] = pred[i] == class_c ? 1 : 0;
  }
  return mask;
}

LabelMap synthesize_target(const LabelMap& pred, std::uint8_t class_c) {
  std::array<bool, 256> present{};
  bool any_c = false;
  for (const std::uint8_t label : pred.cells()) {
    present[label] = true;
    any_c = any_c || label == class_c;
  }
  present[class_c] = false;
  bool any_other = false;
  for (bool p : present) any_other = any_other || p;
  if (!any_other) {
    throw NoBackgroundClassError(
        "cannot build target: every pixel is class " + std::to_string(class_c));
  }

  LabelMap target = pred;
  if (!any_c) return target;

  const std::size_t n = pred.size();
  std::vector<std::int64_t> best(n, kNoSite);
  // Ascending class order plus a strict comparison gives the
  // smallest-index tie rule.
  for (std::size_t k = 0; k < present.size(); ++k) {
    if (!present[k]) continue;
    const std::vector<std::int64_t> dist =
        squared_distance_transform(extract_mask(pred, static_cast<std::uint8_t>(k)));
    for (std::size_t i = 0; i < n; ++i) {
      if (pred[i] == class_c && dist[i] < best[i]) {
        best[i] = dist[i];
        target[i] = static_cast<std::uint8_t>(k);
      }
    }
  }
  return target;
}

LabelMap synthesize_target(const TargetSpec& spec) {
  return synthesize_target(spec.source, spec.class_c);
}

}  // namespace segadv
