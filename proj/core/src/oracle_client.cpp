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

#include "wire.hpp"

namespace segadv {

using nlohmann::json;

namespace {

json call(LineTransport& transport, std::int64_t id, json request) {
  request["v"] = kOracleProtocol;
  request["id"] = id;
  const std::string op = request["op"].get<std::string>();
  json response;
  try {
    response = json::parse(transport.exchange(request.dump()));
  } catch (const json::exception& e) {
    throw ModelError("oracle sent malformed JSON for '" + op + "': " + e.what());
  }
  if (!response.is_object()) {
    throw ModelError("oracle response to '" + op + "' is not an object");
  }
  if (response.value("v", json()) != kOracleProtocol) {
    throw ModelError("oracle speaks " + response.value("v", json()).dump() +
                     ", expected " + kOracleProtocol);
  }
  if (response.value("id", json()) != id) {
    throw ModelError("oracle response id " + response.value("id", json()).dump() +
                     " does not match request id " + std::to_string(id));
  }
  if (response.value("ok", false) != true) {
    const json err = response.value("error", json::object());
    throw ModelError("oracle rejected '" + op + "': " +
                     err.value("code", std::string("unknown")) + ": " +
                     err.value("message", std::string()));
  }
  return response;
}

}  // namespace

RemoteModel::RemoteModel(std::unique_ptr<LineTransport> transport)
    : transport_(std::move(transport)) {
  if (!transport_) throw ModelError("remote model needs a transport");
  const json meta = call(*transport_, next_id_++, {{"op", "meta"}});
  try {
    const auto classes = meta.at("classes").get<std::int64_t>();
    if (classes < 2 || classes > 256) {
      throw ModelError("oracle declares " + std::to_string(classes) +
                       " classes, need 2..256");
    }
    classes_ = static_cast<std::size_t>(classes);
  } catch (const json::exception& e) {
    throw ModelError(std::string("oracle meta response: ") + e.what());
  }
}

LabelMap RemoteModel::predict(const Tensor& image) const {
  const json response = call(*transport_, next_id_++,
                             {{"op", "predict"}, {"image", wire::encode_f32(image)}});
  LabelMap labels = [&] {
    try {
      return wire::decode_u8(response.at("labels"), "labels");
    } catch (const json::exception& e) {
      throw ModelError(std::string("oracle predict response: ") + e.what());
    } catch (const FormatError& e) {
      throw ModelError(std::string("oracle predict response: ") + e.what());
    } catch (const DimensionError& e) {
      throw ModelError(std::string("oracle predict response: ") + e.what());
    }
  }();
  if (!labels.same_extent(image.dim(1), image.dim(2))) {
    throw ModelError("oracle labels do not match the image extent");
  }
  try {
    check_label_range(labels, classes_, "oracle labels");
  } catch (const LabelRangeError& e) {
    throw ModelError(e.what());
  }
  return labels;
}

InputGradient<float> RemoteModel::loss_and_input_grad(
    const Tensor& image, const LabelMap& target) const {
  // Caught locally so a bad target never reaches the wire.
  if (image.rank() != 3 || !target.same_extent(image.dim(1), image.dim(2))) {
    throw DimensionError("target does not match image " +
                         shape_to_string(image.shape()));
  }
  check_label_range(target, classes_, "grad target");
  const json response = call(*transport_, next_id_++,
                             {{"op", "grad"},
                              {"image", wire::encode_f32(image)},
                              {"target", wire::encode_u8(target)}});
  try {
    InputGradient<float> out{response.at("loss").get<float>(),
                             wire::decode_f32(response.at("grad"), "grad")};
    if (out.grad.shape() != image.shape()) {
      throw ModelError("oracle grad shape " + shape_to_string(out.grad.shape()) +
                       " differs from image " + shape_to_string(image.shape()));
    }
    return out;
  } catch (const json::exception& e) {
    throw ModelError(std::string("oracle grad response: ") + e.what());
  } catch (const FormatError& e) {
    throw ModelError(std::string("oracle grad response: ") + e.what());
  } catch (const DimensionError& e) {
    throw ModelError(std::string("oracle grad response: ") + e.what());
  }
}

}  // namespace segadv
