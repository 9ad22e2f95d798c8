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

// On-disk datasets: a directory of image/label PNG pairs plus manifest.json
//
//   {"format": "segadv-manifest/1", "height": 64, "width": 64,
//    "num_classes": 5, "seed": 7,
//    "records": [{"id": "scene_00000", "image_path": "images/scene_00000.png",
//                 "label_path": "labels/scene_00000.png", "split": "val"}, ...]}
//
// Paths are relative to the manifest's directory.

#ifndef SEGADV_DATASET_HPP_
#define SEGADV_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "segadv/scenegen.hpp"
#include "segadv/segnet.hpp"

namespace segadv {

struct ManifestRecord {
  std::string id;
  std::string image_path;
  std::string label_path;
  Split split = Split::kTrain;
};

struct Manifest {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;
  std::vector<ManifestRecord> records;
};

inline constexpr const char* kManifestFileName = "manifest.json";

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
// Throws IoError when missing, FormatError when malformed.
Manifest read_manifest(const std::filesystem::path& path);

// Writes `count` scenes and the manifest under `dir` (created if needed).
Manifest write_dataset(const SceneConfig& config, std::size_t count,
                       const std::filesystem::path& dir);

// Loads the examples of one split. `dir` holds manifest.json.
std::vector<Example> load_examples(const std::filesystem::path& dir,
                                   Split split);

}  // namespace segadv

#endif  // SEGADV_DATASET_HPP_
