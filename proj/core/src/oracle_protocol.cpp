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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include "wire.hpp"

namespace segadv {

using nlohmann::json;

namespace {

json error_response(const json& id, const std::string& code,
                    const std::string& message) {
  return {{"v", kOracleProtocol},
          {"id", id},
          {"ok", false},
          {"error", {{"code", code}, {"message", message}}}};
}

json ok_response(const json& id) {
  return {{"v", kOracleProtocol}, {"id", id}, {"ok", true}};
}

void check_image_matches(const Tensor& image, const LabelMap& target) {
  if (!target.same_extent(image.dim(1), image.dim(2))) {
    throw DimensionError("target " + std::to_string(target.height()) + "x" +
                         std::to_string(target.width()) +
                         " does not match image " +
                         shape_to_string(image.shape()));
  }
}

}  // namespace

std::string OracleResponder::handle(const std::string& request_line) const {
  json request;
  try {
    request = json::parse(request_line);
  } catch (const json::exception& e) {
    return error_response(nullptr, "bad_json", e.what()).dump();
  }
  if (!request.is_object()) {
    return error_response(nullptr, "bad_json", "request must be a JSON object")
        .dump();
  }
  const json id = request.contains("id") ? request["id"] : json(nullptr);
  try {
    if (request.contains("v") && request["v"] != kOracleProtocol) {
      return error_response(id, "bad_request",
                            "unsupported protocol version " + request["v"].dump())
          .dump();
    }
    if (!request.contains("op") || !request["op"].is_string()) {
      return error_response(id, "bad_request", "missing op").dump();
    }
    const std::string op = request["op"].get<std::string>();
    if (op == "meta") {
      json response = ok_response(id);
      response["classes"] = model_.num_classes();
      response["input_range"] = {0, 255};
      response["version"] = kOracleProtocol;
      return response.dump();
    }
    if (op == "predict") {
      const Tensor image = wire::decode_f32(request.at("image"), "image");
      json response = ok_response(id);
      response["labels"] = wire::encode_u8(model_.predict(image));
      return response.dump();
    }
    if (op == "grad") {
      const Tensor image = wire::decode_f32(request.at("image"), "image");
      const LabelMap target = wire::decode_u8(request.at("target"), "target");
      check_image_matches(image, target);
      check_label_range(target, model_.num_classes(), "grad target");
      const InputGradient<float> g = model_.loss_and_input_grad(image, target);
      json response = ok_response(id);
      response["loss"] = g.loss;
      response["grad"] = wire::encode_f32(g.grad);
      return response.dump();
    }
    return error_response(id, "bad_request", "unknown op '" + op + "'").dump();
  } catch (const LabelRangeError& e) {
    return error_response(id, "label_range", e.what()).dump();
  } catch (const DimensionError& e) {
    return error_response(id, "shape", e.what()).dump();
  } catch (const FormatError& e) {
    return error_response(id, "bad_tensor", e.what()).dump();
  } catch (const json::exception& e) {
    return error_response(id, "bad_request", e.what()).dump();
  } catch (const std::exception& e) {
    return error_response(id, "model", e.what()).dump();
  }
}

void OracleResponder::serve(std::istream& in, std::ostream& out) const {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle(line) << '\n';
    out.flush();
  }
}

namespace {

// Writes everything or returns false (peer gone).
bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n =
        ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

void serve_connection(const OracleResponder& responder, int fd) {
  std::string buffer;
  char chunk[65536];
  for (;;) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t newline;
    while ((newline = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, newline);
      buffer.erase(0, newline + 1);
      if (line.empty()) continue;
      if (!send_all(fd, responder.handle(line) + "\n")) return;
    }
  }
}

}  // namespace

void serve_tcp(const OracleResponder& responder, std::uint16_t port,
               std::size_t max_connections,
               const std::function<void(std::uint16_t)>& on_listening) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
  const int reuse = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof reuse);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listener, 4) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(listener);
    throw IoError("cannot listen on port " + std::to_string(port) + ": " +
                  reason);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listening) on_listening(ntohs(addr.sin_port));

  for (std::size_t served = 0;
       max_connections == 0 || served < max_connections; ++served) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    serve_connection(responder, fd);
    ::close(fd);
  }
  ::close(listener);
}

}  // namespace segadv
