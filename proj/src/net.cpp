// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <stdexcept>

namespace hematch {
namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

/// One direction of the loopback: a bounded-by-nothing byte queue with
/// blocking reads and EOF on writer close.
struct Pipe {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<unsigned char> data;
  bool closed = false;

  void write(std::span<const unsigned char> bytes) {
    std::lock_guard lock(mutex);
    if (closed) throw std::runtime_error("loopback: send on closed channel");
    data.insert(data.end(), bytes.begin(), bytes.end());
    ready.notify_all();
  }

  std::size_t read(unsigned char* buf, std::size_t maxlen) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return !data.empty() || closed; });
    if (data.empty()) return 0;  // closed
    std::size_t n = std::min(maxlen, data.size());
    for (std::size_t i = 0; i < n; ++i) {
      buf[i] = data.front();
      data.pop_front();
    }
    return n;
  }

  void close_end() {
    std::lock_guard lock(mutex);
    closed = true;
    ready.notify_all();
  }
};

class LoopbackChannel final : public ByteChannel {
 public:
  LoopbackChannel(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in)
      : out_(std::move(out)), in_(std::move(in)) {}
  ~LoopbackChannel() override { LoopbackChannel::close(); }

  void send(std::span<const unsigned char> data) override { out_->write(data); }
  std::size_t recv(unsigned char* buf, std::size_t maxlen) override {
    return in_->read(buf, maxlen);
  }
  void close() override {
    out_->close_end();
    in_->close_end();
  }

 private:
  std::shared_ptr<Pipe> out_;
  std::shared_ptr<Pipe> in_;
};

class TcpChannel final : public ByteChannel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}
  ~TcpChannel() override { TcpChannel::close(); }

  void send(std::span<const unsigned char> data) override {
    const unsigned char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      ssize_t n = ::send(fd_, p, left, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("tcp send");
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  std::size_t recv(unsigned char* buf, std::size_t maxlen) override {
    while (true) {
      ssize_t n = ::recv(fd_, buf, maxlen, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("tcp recv");
      }
      return static_cast<std::size_t>(n);
    }
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
};

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  int rc = getaddrinfo(host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr)
    throw std::runtime_error("cannot resolve host '" + host + "': " + gai_strerror(rc));
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

}  // namespace

std::pair<std::unique_ptr<ByteChannel>, std::unique_ptr<ByteChannel>> make_loopback_pair() {
  auto ab = std::make_shared<Pipe>();
  auto ba = std::make_shared<Pipe>();
  return {std::make_unique<LoopbackChannel>(ab, ba), std::make_unique<LoopbackChannel>(ba, ab)};
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw_errno("tcp socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    int saved = errno;
    ::close(fd_);
    fd_ = -1;
    errno = saved;
    throw_errno("tcp bind");
  }
  if (::listen(fd_, 16) < 0) {
    int saved = errno;
    ::close(fd_);
    fd_ = -1;
    errno = saved;
    throw_errno("tcp listen");
  }
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) < 0)
    throw_errno("tcp getsockname");
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<ByteChannel> TcpListener::accept() {
  while (true) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return nullptr;  // listener closed
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return std::make_unique<TcpChannel>(fd);
  }
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

std::unique_ptr<ByteChannel> tcp_connect(const std::string& host, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("tcp socket");
  sockaddr_in addr = resolve(host.empty() ? "127.0.0.1" : host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    int saved = errno;
    ::close(fd);
    errno = saved;
    throw_errno("tcp connect to " + host + ":" + std::to_string(port));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<TcpChannel>(fd);
}

}  // namespace hematch
