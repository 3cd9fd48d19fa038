// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "hematch/errors.hpp"
#include "hematch/int128.hpp"

namespace hematch {

/// Little-endian byte stream writer.
class ByteWriter {
 public:
  std::vector<unsigned char> take() { return std::move(buf_); }
  const std::vector<unsigned char>& bytes() const { return buf_; }
  std::size_t size() const { return buf_.size(); }

  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  /// Exactly `width` little-endian bytes of v.
  void uint(u128 v, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i) {
      buf_.push_back(static_cast<unsigned char>(v & 0xff));
      v >>= 8;
    }
    if (v != 0) throw SerializationError("ByteWriter: value does not fit declared width");
  }
  void raw(std::span<const unsigned char> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
  void str16(const std::string& s) {
    if (s.size() > 0xffff) throw SerializationError("ByteWriter: string too long");
    u16(static_cast<std::uint16_t>(s.size()));
    raw({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
  }
  void blob32(std::span<const unsigned char> data) {
    if (data.size() > 0xffffffffULL) throw SerializationError("ByteWriter: blob too long");
    u32(static_cast<std::uint32_t>(data.size()));
    raw(data);
  }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) {
      buf_.push_back(static_cast<unsigned char>(v & 0xff));
      v >>= 8;
    }
  }
  std::vector<unsigned char> buf_;
};

/// Bounds-checked little-endian reader; every overrun throws rather than
/// reading past the buffer, which is what the frame fuzzer leans on.
class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  u128 uint(std::size_t width) {
    if (width > 16) throw SerializationError("ByteReader: integer width above 16 bytes");
    need(width);
    u128 v = 0;
    for (std::size_t i = 0; i < width; ++i)
      v |= static_cast<u128>(data_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }
  std::span<const unsigned char> raw(std::size_t len) {
    need(len);
    auto out = data_.subspan(pos_, len);
    pos_ += len;
    return out;
  }
  std::string str16() {
    std::size_t len = u16();
    auto s = raw(len);
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }
  std::span<const unsigned char> blob32() {
    std::size_t len = u32();
    return raw(len);
  }

 private:
  void need(std::size_t len) {
    if (remaining() < len) throw SerializationError("ByteReader: truncated input");
  }
  std::uint64_t get(std::size_t width) {
    need(width);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }

  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

}  // namespace hematch
