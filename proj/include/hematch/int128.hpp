// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

namespace hematch {

__extension__ typedef unsigned __int128 u128;
__extension__ typedef __int128 s128;

/// Number of bits needed to represent v (0 for v == 0).
constexpr int bit_length(u128 v) {
  int bits = 0;
  while (v != 0) {
    ++bits;
    v >>= 1;
  }
  return bits;
}

constexpr u128 u128_max() { return ~static_cast<u128>(0); }

/// (a + b) mod m, assuming a, b < m. Safe for m up to 2^127.
constexpr u128 add_mod(u128 a, u128 b, u128 m) {
  u128 s = a + b;
  if (s < a || s >= m) s -= m;  // wrapped or exceeded
  return s;
}

/// (a - b) mod m, assuming a, b < m.
constexpr u128 sub_mod(u128 a, u128 b, u128 m) {
  return a >= b ? a - b : m - b + a;
}

/// (a * b) mod m for any m < 2^127. Shift-and-add; used off the hot path
/// (the NTT engine handles bulk multiplication with word-size moduli).
constexpr u128 mul_mod(u128 a, u128 b, u128 m) {
  a %= m;
  b %= m;
  if (a == 0 || b == 0) return 0;
  if (m <= u128_max() / a) return (a * b) % m;  // product fits in 128 bits
  u128 r = 0;
  while (b != 0) {
    if (b & 1) r = add_mod(r, a, m);
    a = add_mod(a, a, m);
    b >>= 1;
  }
  return r;
}

/// (base ^ exp) mod m.
constexpr u128 pow_mod(u128 base, u128 exp, u128 m) {
  u128 r = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1) r = mul_mod(r, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return r;
}

std::string to_string(u128 v);

}  // namespace hematch
