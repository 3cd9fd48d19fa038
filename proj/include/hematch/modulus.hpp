// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hematch/int128.hpp"

namespace hematch {

/// Coefficient modulus. Values up to 2^127 are supported; the shipped presets
/// stay at or below 110 bits.
class Modulus {
 public:
  Modulus() : value_(2), bits_(2) {}
  explicit Modulus(u128 value);

  u128 value() const { return value_; }
  int bit_length() const { return bits_; }
  /// floor(value / 2): symmetric representatives are in [-half, half].
  u128 half() const { return value_ >> 1; }
  /// Serialized width of one coefficient, in bytes.
  std::size_t byte_width() const { return (static_cast<std::size_t>(bits_) + 7) / 8; }

  u128 reduce(u128 v) const { return v % value_; }
  /// Centered (symmetric) representative as magnitude + sign. For even moduli
  /// the boundary value m/2 maps to -m/2.
  s128 to_signed(u128 v) const {
    return v > half() || (v == half() && (value_ & 1) == 0)
               ? -static_cast<s128>(value_ - v)
               : static_cast<s128>(v);
  }
  u128 from_signed(s128 v) const {
    s128 m = static_cast<s128>(value_);
    s128 r = v % m;
    if (r < 0) r += m;
    return static_cast<u128>(r);
  }

  friend bool operator==(const Modulus& a, const Modulus& b) { return a.value_ == b.value_; }
  friend bool operator!=(const Modulus& a, const Modulus& b) { return a.value_ != b.value_; }

 private:
  u128 value_;
  int bits_;
};

/// Miller-Rabin behind GMP; exact for every size used here.
bool is_prime(u128 v);

/// Largest prime p < 2^max_bits with p ≡ 1 (mod stride).
u128 largest_prime_below(int max_bits, u128 stride);

/// Descending primes p < 2^62 with p ≡ 1 (mod stride), skipping `skip` hits.
std::vector<std::uint64_t> ntt_prime_chain(std::uint64_t stride, std::size_t count,
                                           std::size_t skip = 0);

/// Smallest primitive 2n-th root of unity modulo prime p (2n a power of two
/// dividing p-1): the first base x = 2, 3, ... whose power x^((p-1)/2n) has
/// exact order 2n.
std::uint64_t primitive_root_2n(std::uint64_t p, std::uint64_t two_n);

}  // namespace hematch
