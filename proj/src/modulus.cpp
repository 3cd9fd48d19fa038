// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/modulus.hpp"

#include <gmp.h>

#include <stdexcept>

namespace hematch {

namespace {

void mpz_set_u128(mpz_t out, u128 v) {
  mpz_set_ui(out, static_cast<unsigned long>(v >> 64));
  mpz_mul_2exp(out, out, 64);
  mpz_add_ui(out, out, static_cast<unsigned long>(v & 0xffffffffffffffffULL));
}

}  // namespace

Modulus::Modulus(u128 value) : value_(value), bits_(::hematch::bit_length(value)) {
  if (value < 2) throw std::invalid_argument("Modulus: value must be at least 2");
  if (bits_ > 127) throw std::invalid_argument("Modulus: values above 2^127 are unsupported");
}

bool is_prime(u128 v) {
  if (v < 2) return false;
  mpz_t z;
  mpz_init(z);
  mpz_set_u128(z, v);
  int r = mpz_probab_prime_p(z, 40);
  mpz_clear(z);
  return r != 0;
}

u128 largest_prime_below(int max_bits, u128 stride) {
  if (max_bits < 2 || max_bits > 127) throw std::invalid_argument("largest_prime_below: bad bit size");
  u128 limit = (static_cast<u128>(1) << max_bits) - 1;
  // Largest candidate ≡ 1 (mod stride) not exceeding limit.
  u128 c = (limit - 1) / stride * stride + 1;
  for (; c > stride; c -= stride) {
    if (is_prime(c)) return c;
  }
  throw std::runtime_error("largest_prime_below: no prime found");
}

std::vector<std::uint64_t> ntt_prime_chain(std::uint64_t stride, std::size_t count,
                                           std::size_t skip) {
  std::vector<std::uint64_t> primes;
  std::uint64_t limit = (1ULL << 62) - 1;
  std::uint64_t c = (limit - 1) / stride * stride + 1;
  for (; c > stride && primes.size() < count; c -= stride) {
    if (is_prime(c)) {
      if (skip > 0) {
        --skip;
        continue;
      }
      primes.push_back(c);
    }
  }
  if (primes.size() < count) throw std::runtime_error("ntt_prime_chain: prime pool exhausted");
  return primes;
}

std::uint64_t primitive_root_2n(std::uint64_t p, std::uint64_t two_n) {
  if (two_n == 0 || (two_n & (two_n - 1)) != 0)
    throw std::invalid_argument("primitive_root_2n: 2n must be a power of two");
  if ((p - 1) % two_n != 0)
    throw std::invalid_argument("primitive_root_2n: 2n does not divide p-1");
  std::uint64_t exp = (p - 1) / two_n;
  for (std::uint64_t x = 2; x < p; ++x) {
    std::uint64_t c = static_cast<std::uint64_t>(pow_mod(x, exp, p));
    if (c == 0 || c == 1) continue;
    // Order divides 2n (a power of two); it is exactly 2n iff c^n = -1.
    if (pow_mod(c, two_n / 2, p) == p - 1) return c;
  }
  throw std::runtime_error("primitive_root_2n: no root found");
}

}  // namespace hematch
