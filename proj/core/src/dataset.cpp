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

#include "segadv/dataset.hpp"

#include <fstream>
#include <json.hpp>

#include "segadv/image_io.hpp"

namespace segadv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kManifestFormat = "segadv-manifest/1";
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  json records = json::array();
  for (const ManifestRecord& r : manifest.records) {
    records.push_back({{"id", r.id},
                       {"image_path", r.image_path},
                       {"label_path", r.label_path},
                       {"split", to_string(r.split)}});
  }
  const json doc = {{"format", kManifestFormat},
                    {"height", manifest.height},
                    {"width", manifest.width},
                    {"num_classes", manifest.num_classes},
                    {"seed", manifest.seed},
                    {"records", records}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  try {
    const json doc = json::parse(in);
    if (doc.at("format").get<std::string>() != kManifestFormat) {
      throw FormatError("manifest '" + path.string() +
                        "' has unsupported format tag");
    }
    Manifest m;
    m.height = doc.at("height").get<std::size_t>();
    m.width = doc.at("width").get<std::size_t>();
    m.num_classes = doc.at("num_classes").get<std::size_t>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    for (const json& r : doc.at("records")) {
      m.records.push_back({r.at("id").get<std::string>(),
                           r.at("image_path").get<std::string>(),
                           r.at("label_path").get<std::string>(),
                           parse_split(r.at("split").get<std::string>())});
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest '" + path.string() + "': " + e.what());
  }
}

Manifest write_dataset(const SceneConfig& config, std::size_t count,
                       const fs::path& dir) {
  validate(config);
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "labels");
  Manifest manifest;
  manifest.height = config.height;
  manifest.width = config.width;
  manifest.num_classes = kSceneClassCount;
  manifest.seed = config.rng_seed;
  for (std::size_t i = 0; i < count; ++i) {
    const Scene scene = generate(config, i);
    ManifestRecord record;
    record.id = scene_id(i);
    record.image_path = "images/" + record.id + ".png";
    record.label_path = "labels/" + record.id + ".png";
    record.split = split_for_index(i);
    write_image_png(scene.image, dir / record.image_path);
    write_labels_png(scene.labels, dir / record.label_path);
    manifest.records.push_back(std::move(record));
  }
  write_manifest(manifest, dir / kManifestFileName);
  return manifest;
}

std::vector<Example> load_examples(const fs::path& dir, Split split) {
  const Manifest manifest = read_manifest(dir / kManifestFileName);
  std::vector<Example> out;
  for (const ManifestRecord& r : manifest.records) {
    if (r.split != split) continue;
    Example ex;
    ex.id = r.id;
    ex.image = read_image_png(dir / r.image_path);
    ex.labels = read_labels_png(dir / r.label_path);
    if (!ex.labels.same_extent(ex.image.dim(1), ex.image.dim(2))) {
      throw FormatError("label map of '" + r.id +
                        "' does not match its image size");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace segadv
