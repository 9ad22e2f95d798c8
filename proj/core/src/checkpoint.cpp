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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "segadv/segnet.hpp"

namespace segadv {
namespace {

constexpr char kMagic[4] = {'S', 'G', 'V', '1'};
constexpr std::uint32_t kMaxNameLength = 1024;
constexpr std::uint32_t kMaxRank = 8;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    raw(&v, sizeof v, what);
    return v;
  }
  void raw(void* p, std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw TruncatedError(std::string("checkpoint truncated while reading ") +
                           what + " at byte " + std::to_string(pos_));
    }
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const SegModel& model) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(model.arch_id());
  w.u32(static_cast<std::uint32_t>(model.num_classes()));
  w.u32(static_cast<std::uint32_t>(model.params().size()));
  for (const auto& [name, tensor] : model.params()) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.raw(name.data(), name.size());
    w.u32(static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t extent : tensor.shape()) {
      w.u32(static_cast<std::uint32_t>(extent));
    }
    for (float v : tensor.data()) w.f32(v);
  }
  return w.take();
}

SegModel decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.raw(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kMagic, 3) != 0) {
    throw FormatError("not a segadv checkpoint (bad magic bytes)");
  }
  if (magic[3] != kMagic[3]) {
    throw VersionError(std::string("unsupported checkpoint version '") +
                       magic[3] + "' (this build reads version 1)");
  }
  const std::uint32_t arch = r.u32("arch id");
  if (arch != kFcn3sArchId) {
    throw VersionError("unsupported architecture id " + std::to_string(arch));
  }
  const std::uint32_t num_classes = r.u32("num_classes");
  const std::uint32_t count = r.u32("tensor count");
  const auto expected = fcn3s_param_shapes(num_classes);
  if (count != expected.size()) {
    throw DimensionError("checkpoint has " + std::to_string(count) +
                         " tensors, architecture requires " +
                         std::to_string(expected.size()));
  }
  ParamMap<float> params;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t name_len = r.u32("tensor name length");
    if (name_len == 0 || name_len > kMaxNameLength) {
      throw FormatError("implausible tensor name length " +
                        std::to_string(name_len));
    }
    std::string name(name_len, '\0');
    r.raw(name.data(), name_len, "tensor name");
    const std::uint32_t rank = r.u32("tensor rank");
    if (rank == 0 || rank > kMaxRank) {
      throw FormatError("implausible rank " + std::to_string(rank) +
                        " for tensor '" + name + "'");
    }
    Shape shape(rank);
    for (auto& extent : shape) extent = r.u32("tensor extent");
    const auto it = expected.find(name);
    if (it == expected.end()) {
      throw DimensionError("checkpoint tensor '" + name +
                           "' is not part of the architecture");
    }
    if (it->second != shape) {
      throw DimensionError("checkpoint tensor '" + name + "' has shape " +
                           shape_to_string(shape) + ", architecture requires " +
                           shape_to_string(it->second));
    }
    std::vector<float> data(shape_volume(shape));
    r.raw(data.data(), data.size() * sizeof(float), "tensor data");
    params.emplace(name, Tensor(std::move(shape), std::move(data)));
  }
  if (!r.at_end()) {
    throw FormatError("trailing bytes after checkpoint payload at byte " +
                      std::to_string(r.position()));
  }
  return SegModel(num_classes, std::move(params));
}

template <typename T>
void save_checkpoint(const BasicSegModel<T>& model,
                     const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  if constexpr (std::is_same_v<T, float>) {
    bytes = encode_checkpoint(model);
  } else {
    bytes = encode_checkpoint(model.template cast<float>());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

template <typename T>
BasicSegModel<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  SegModel model = decode_checkpoint(bytes);
  if constexpr (std::is_same_v<T, float>) {
    return model;
  } else {
    return model.template cast<T>();
  }
}

template void save_checkpoint(const BasicSegModel<float>&,
                              const std::filesystem::path&);
template void save_checkpoint(const BasicSegModel<double>&,
                              const std::filesystem::path&);
template BasicSegModel<float> load_checkpoint(const std::filesystem::path&);
template BasicSegModel<double> load_checkpoint(const std::filesystem::path&);

}  // namespace segadv
