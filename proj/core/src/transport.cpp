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

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "segadv/oracle.hpp"

namespace segadv {
namespace {

std::string errno_text() { return std::strerror(errno); }

// Pops one '\n'-terminated line from buffer if present.
bool take_line(std::string& buffer, std::string& line) {
  const std::size_t newline = buffer.find('\n');
  if (newline == std::string::npos) return false;
  line = buffer.substr(0, newline);
  buffer.erase(0, newline + 1);
  return true;
}

}  // namespace

TcpTransport::TcpTransport(const std::string& host, std::uint16_t port,
                           std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found);
      rc != 0) {
    throw ModelError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  std::string reason = "no address";
  for (addrinfo* a = found; a != nullptr; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    reason = errno_text();
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) {
    throw ModelError("cannot connect to " + host + ":" + service + ": " +
                     reason);
  }
}

TcpTransport::~TcpTransport() {
  if (fd_ >= 0) ::close(fd_);
}

std::string TcpTransport::exchange(const std::string& line) {
  const std::string out = line + "\n";
  for (std::size_t sent = 0; sent < out.size();) {
    const ssize_t n =
        ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      throw ModelError("oracle send timed out");
    }
    if (n <= 0) throw ModelError("oracle send failed: " + errno_text());
    sent += static_cast<std::size_t>(n);
  }
  std::string response;
  char chunk[65536];
  while (!take_line(buffer_, response)) {
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      throw ModelError("oracle response timed out");
    }
    if (n < 0) throw ModelError("oracle receive failed: " + errno_text());
    if (n == 0) throw ModelError("oracle closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  return response;
}

ProcessTransport::ProcessTransport(const std::string& command,
                                   std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  // A dead child must surface as a write error, not kill us.
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw ModelError("pipe: " + errno_text());
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ModelError("pipe: " + errno_text());
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw ModelError("fork: " + errno_text());
  }
  if (pid == 0) {
    ::setpgid(0, 0);  // own group, so SIGTERM reaches the whole command
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  pid_ = pid;
}

ProcessTransport::~ProcessTransport() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    // Closing stdin normally ends the responder; give it a moment.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(-pid_, SIGTERM);
    ::waitpid(pid_, nullptr, 0);
  }
}

std::string ProcessTransport::exchange(const std::string& line) {
  const std::string out = line + "\n";
  for (std::size_t sent = 0; sent < out.size();) {
    const ssize_t n = ::write(to_child_, out.data() + sent, out.size() - sent);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ModelError("oracle process write failed: " + errno_text());
    sent += static_cast<std::size_t>(n);
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::string response;
  char chunk[65536];
  while (!take_line(buffer_, response)) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw ModelError("oracle process timed out");
    pollfd p{from_child_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) throw ModelError("poll: " + errno_text());
    if (ready == 0) throw ModelError("oracle process timed out");
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw ModelError("oracle process read failed: " + errno_text());
    if (n == 0) throw ModelError("oracle process exited");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  return response;
}

std::unique_ptr<LineTransport> connect_oracle(const std::string& endpoint) {
  if (endpoint.starts_with("tcp:")) {
    const std::string rest = endpoint.substr(4);
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) {
      throw Error("oracle endpoint '" + endpoint + "' must be tcp:HOST:PORT");
    }
    const std::string port_text = rest.substr(colon + 1);
    unsigned port = 0;
    const auto [end, ec] = std::from_chars(
        port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || end != port_text.data() + port_text.size() ||
        port == 0 || port > 65535) {
      throw Error("invalid port in oracle endpoint '" + endpoint + "'");
    }
    return std::make_unique<TcpTransport>(rest.substr(0, colon),
                                          static_cast<std::uint16_t>(port));
  }
  if (endpoint.starts_with("stdio:")) {
    const std::string command = endpoint.substr(6);
    if (command.empty()) {
      throw Error("oracle endpoint '" + endpoint + "' has no command");
    }
    return std::make_unique<ProcessTransport>(command);
  }
  throw Error("oracle endpoint '" + endpoint +
              "' must start with tcp: or stdio:");
}

}  // namespace segadv
