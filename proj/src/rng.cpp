// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/rng.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hematch {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  });
}

}  // namespace

std::array<unsigned char, 32> sha256(std::span<const unsigned char> data) {
  ensure_sodium();
  std::array<unsigned char, 32> out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

SeedableRng::SeedableRng(std::uint64_t seed) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
  key_ = sha256({bytes, 8});
  refill();
}

SeedableRng::SeedableRng(std::span<const unsigned char> seed) {
  key_ = sha256(seed);
  refill();
}

void SeedableRng::refill() {
  ensure_sodium();
  unsigned char nonce[8];
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<unsigned char>(block_ >> (8 * i));
  ++block_;
  // ChaCha20 of an all-zero message is the raw keystream.
  std::memset(buf_.data(), 0, buf_.size());
  crypto_stream_chacha20_xor(buf_.data(), buf_.data(), buf_.size(), nonce, key_.data());
  pos_ = 0;
}

void SeedableRng::fill(unsigned char* out, std::size_t len) {
  while (len > 0) {
    if (pos_ == buf_.size()) refill();
    std::size_t take = std::min(len, buf_.size() - pos_);
    std::memcpy(out, buf_.data() + pos_, take);
    pos_ += take;
    out += take;
    len -= take;
  }
}

std::uint64_t SeedableRng::next_u64() {
  unsigned char b[8];
  fill(b, 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

u128 SeedableRng::next_u128() {
  u128 lo = next_u64();
  u128 hi = next_u64();
  return (hi << 64) | lo;
}

u128 SeedableRng::uniform_below(u128 bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  if (bound == 1) return 0;
  int bits = bit_length(bound - 1);
  u128 mask = (bits == 128) ? u128_max() : ((static_cast<u128>(1) << bits) - 1);
  for (;;) {
    u128 v;
    if (bits <= 64) {
      v = next_u64() & mask;
    } else {
      v = next_u128() & mask;
    }
    if (v < bound) return v;
  }
}

double SeedableRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeedableRng::next_gaussian() {
  if (have_gaussian_) {
    have_gaussian_ = false;
    return spare_gaussian_;
  }
  double u1, u2;
  do {
    u1 = next_double();
  } while (u1 <= 0.0);
  u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_gaussian_ = r * std::sin(theta);
  have_gaussian_ = true;
  return r * std::cos(theta);
}

SeedableRng SeedableRng::fork(std::uint64_t label) {
  unsigned char material[40];
  fill(material, 32);
  for (int i = 0; i < 8; ++i) material[32 + i] = static_cast<unsigned char>(label >> (8 * i));
  return SeedableRng(std::span<const unsigned char>(material, 40));
}

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
    v /= 10;
  }
  return {s.rbegin(), s.rend()};
}

}  // namespace hematch
