// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>

namespace hematch {

/// Reliable, ordered, blocking byte stream. The protocol layer is written
/// against this interface only, so TCP and the in-process loopback are
/// interchangeable.
class ByteChannel {
 public:
  virtual ~ByteChannel() = default;

  /// Writes the whole buffer or throws std::runtime_error.
  virtual void send(std::span<const unsigned char> data) = 0;

  /// Blocks for at least one byte; returns the number read, 0 on orderly
  /// close. Throws std::runtime_error on transport failure.
  virtual std::size_t recv(unsigned char* buf, std::size_t maxlen) = 0;

  /// Signals end-of-stream to the peer; further sends fail.
  virtual void close() = 0;
};

/// Two connected in-process endpoints: bytes sent on one side arrive on the
/// other, both directions, with blocking reads. Destroying or closing an
/// endpoint wakes the peer with EOF.
std::pair<std::unique_ptr<ByteChannel>, std::unique_ptr<ByteChannel>> make_loopback_pair();

/// Listening TCP socket. Construction binds and listens; port 0 picks an
/// ephemeral port, readable afterwards via port().
class TcpListener {
 public:
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }

  /// Blocks for the next connection; returns nullptr once close() has been
  /// called from another thread.
  std::unique_ptr<ByteChannel> accept();

  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<ByteChannel> tcp_connect(const std::string& host, std::uint16_t port);

}  // namespace hematch
