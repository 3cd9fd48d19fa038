// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Internal RAII helpers around raw mpz_t. Not installed.

#pragma once

#include <gmp.h>

#include "hematch/int128.hpp"

namespace hematch::detail {

struct Mpz {
  mpz_t z;
  Mpz() { mpz_init(z); }
  explicit Mpz(unsigned long v) { mpz_init_set_ui(z, v); }
  Mpz(const Mpz& o) { mpz_init_set(z, o.z); }
  Mpz& operator=(const Mpz& o) {
    mpz_set(z, o.z);
    return *this;
  }
  ~Mpz() { mpz_clear(z); }
  operator mpz_ptr() { return z; }
  operator mpz_srcptr() const { return z; }
};

inline void mpz_set_u128(mpz_ptr out, u128 v) {
  mpz_set_ui(out, static_cast<unsigned long>(v >> 64));
  mpz_mul_2exp(out, out, 64);
  mpz_add_ui(out, out, static_cast<unsigned long>(v & 0xffffffffffffffffULL));
}

inline void mpz_set_s128(mpz_ptr out, s128 v) {
  if (v < 0) {
    mpz_set_u128(out, static_cast<u128>(-v));
    mpz_neg(out, out);
  } else {
    mpz_set_u128(out, static_cast<u128>(v));
  }
}

/// Requires 0 <= z < 2^128.
inline u128 mpz_to_u128(mpz_srcptr z) {
  std::uint64_t limbs[2] = {0, 0};
  size_t count = 0;
  mpz_export(limbs, &count, -1, 8, 0, 0, z);
  return (static_cast<u128>(limbs[1]) << 64) | limbs[0];
}

}  // namespace hematch::detail
