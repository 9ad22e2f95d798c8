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

// sgv-oracle/1: a line protocol that lets the attack engine query a model
// living in another process.
//
// Each request and response is one JSON object terminated by '\n'. Tensors
// travel as {"dtype": "f32"|"u8", "shape": [...], "data": <base64 of raw
// little-endian bytes>}.
//
//   -> {"v":"sgv-oracle/1","id":1,"op":"meta"}
//   <- {"v":"sgv-oracle/1","id":1,"ok":true,"classes":5,
//       "input_range":[0,255],"version":"sgv-oracle/1"}
//   -> {"v":...,"id":2,"op":"predict","image":<f32 3xHxW>}
//   <- {"v":...,"id":2,"ok":true,"labels":<u8 HxW>}
//   -> {"v":...,"id":3,"op":"grad","image":<f32 3xHxW>,"target":<u8 HxW>}
//   <- {"v":...,"id":3,"ok":true,"loss":0.42,"grad":<f32 3xHxW>}
//
// Failures answer {"v":...,"id":<id or null>,"ok":false,
// "error":{"code":...,"message":...}}; the id is null only when the request
// could not be parsed. loss/grad are the mean pixel cross-entropy and its
// gradient with respect to raw 0..255 pixels.

#ifndef SEGADV_ORACLE_HPP_
#define SEGADV_ORACLE_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segadv/attack.hpp"

namespace segadv {

inline constexpr const char* kOracleProtocol = "sgv-oracle/1";

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Strict RFC 4648 decoding with padding; throws FormatError otherwise.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Per-pixel linear classifier used to test the protocol end to end:
// logits[k](p) = sum_c weight[k][c] * x[c](p) + bias[k], on raw pixels.
class LinearReferenceModel final : public DifferentiableModel {
 public:
  static constexpr std::size_t kClasses = 5;

  std::size_t num_classes() const override { return kClasses; }
  LabelMap predict(const Tensor& image) const override;
  InputGradient<float> loss_and_input_grad(
      const Tensor& image, const LabelMap& target) const override;

  static double weight(std::size_t k, std::size_t c);
  static double bias(std::size_t k);

 private:
  Tensor logits(const Tensor& image) const;
};

// Answers protocol requests from a model. handle() never throws.
class OracleResponder {
 public:
  explicit OracleResponder(const DifferentiableModel& model) : model_(model) {}

  std::string handle(const std::string& request_line) const;

  // Reads requests line by line until EOF, writing one response per line.
  void serve(std::istream& in, std::ostream& out) const;

 private:
  const DifferentiableModel& model_;
};

// Serves connections on 127.0.0.1:port one at a time. Returns after
// `max_connections` connections have closed (0 = forever). `on_listening`
// receives the bound port (useful with port 0) before the first accept.
void serve_tcp(const OracleResponder& responder, std::uint16_t port,
               std::size_t max_connections = 0,
               const std::function<void(std::uint16_t)>& on_listening = {});

// Sends one request line, returns one response line (without '\n').
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual std::string exchange(const std::string& line) = 0;
};

class LoopbackTransport final : public LineTransport {
 public:
  explicit LoopbackTransport(const OracleResponder& responder)
      : responder_(responder) {}
  std::string exchange(const std::string& line) override {
    return responder_.handle(line);
  }

 private:
  const OracleResponder& responder_;
};

class TcpTransport final : public LineTransport {
 public:
  TcpTransport(const std::string& host, std::uint16_t port,
               std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::string exchange(const std::string& line) override;

 private:
  int fd_ = -1;
  std::string buffer_;
};

// Spawns `/bin/sh -c command` and talks over its stdin/stdout.
class ProcessTransport final : public LineTransport {
 public:
  explicit ProcessTransport(
      const std::string& command,
      std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ProcessTransport() override;
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  std::string exchange(const std::string& line) override;

 private:
  int to_child_ = -1;
  int from_child_ = -1;
  int pid_ = -1;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
};

// "tcp:HOST:PORT" or "stdio:COMMAND".
std::unique_ptr<LineTransport> connect_oracle(const std::string& endpoint);

// DifferentiableModel backed by a protocol peer. Queries "meta" on
// construction. Every response must echo the request id. Not thread-safe.
class RemoteModel final : public DifferentiableModel {
 public:
  explicit RemoteModel(std::unique_ptr<LineTransport> transport);

  std::size_t num_classes() const override { return classes_; }
  LabelMap predict(const Tensor& image) const override;
  InputGradient<float> loss_and_input_grad(
      const Tensor& image, const LabelMap& target) const override;

 private:
  std::unique_ptr<LineTransport> transport_;
  std::size_t classes_ = 0;
  mutable std::int64_t next_id_ = 1;
};

}  // namespace segadv

#endif  // SEGADV_ORACLE_HPP_
