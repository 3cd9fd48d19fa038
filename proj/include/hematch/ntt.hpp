// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hematch/int128.hpp"
#include "hematch/modulus.hpp"

namespace hematch {

/// Arithmetic modulo a word-size prime p < 2^62 with precomputed Barrett
/// constants. Inputs to mul() must be canonical (< p).
struct PrimeField {
  std::uint64_t p = 0;
  std::uint64_t mu = 0;        // floor(2^(2k+1) / p), k = bit length of p
  int shift1 = 0;              // k - 1
  int shift2 = 0;              // k + 2
  std::uint64_t r64 = 0;       // 2^64 mod p

  PrimeField() = default;
  explicit PrimeField(std::uint64_t prime);

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = a + b;
    return s >= p ? s - p : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
    return a >= b ? a - b : a + p - b;
  }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    u128 r = static_cast<u128>(a) * b;
    std::uint64_t q1 = static_cast<std::uint64_t>(r >> shift1);
    std::uint64_t q3 = static_cast<std::uint64_t>((static_cast<u128>(q1) * mu) >> shift2);
    std::uint64_t rem = static_cast<std::uint64_t>(r) - q3 * p;
    while (rem >= p) rem -= p;
    return rem;
  }
  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const {
    std::uint64_t r = 1;
    while (exp != 0) {
      if (exp & 1) r = mul(r, base);
      base = mul(base, base);
      exp >>= 1;
    }
    return r;
  }
  std::uint64_t inv(std::uint64_t a) const { return pow(a, p - 2); }
  std::uint64_t reduce_u128(u128 v) const {
    std::uint64_t hi = static_cast<std::uint64_t>(v >> 64) % p;
    std::uint64_t lo = static_cast<std::uint64_t>(v) % p;
    return add(mul(hi, r64), lo);
  }
};

/// Negacyclic number-theoretic transform over Z_p[x]/(x^n + 1) for a prime
/// p ≡ 1 (mod 2n), n a power of two. forward() maps natural coefficient order
/// to bit-reversed evaluation order; inverse() undoes it exactly.
class NttTable {
 public:
  NttTable(std::uint64_t p, std::size_t n);

  void forward(std::uint64_t* a) const;
  void inverse(std::uint64_t* a) const;

  const PrimeField& field() const { return fq_; }
  std::uint64_t prime() const { return fq_.p; }
  std::size_t degree() const { return n_; }
  std::uint64_t psi() const { return psi_; }

 private:
  PrimeField fq_;
  std::size_t n_;
  int log_n_;
  std::uint64_t psi_;
  std::vector<std::uint64_t> w_;         // psi^brv(i), forward twiddles
  std::vector<std::uint64_t> w_shoup_;
  std::vector<std::uint64_t> wi_;        // psi^-brv(i), inverse twiddles
  std::vector<std::uint64_t> wi_shoup_;
  std::uint64_t n_inv_ = 0;
  std::uint64_t n_inv_shoup_ = 0;
};

/// Shared tables over helper primes ≡ 1 (mod 2n) just below 2^62, enough of
/// them that their product exceeds 2^min_bits. Thread safe; the returned
/// pointers stay valid for the process lifetime.
std::vector<const NttTable*> helper_tables(std::size_t n, int min_bits);

/// a · b mod (x^n + 1, m), exact for any modulus m; inputs canonical (< m).
std::vector<u128> negacyclic_mul_mod(std::span<const u128> a, std::span<const u128> b,
                                     const Modulus& m);

/// sum_i a_i · b_i mod (x^n + 1, m), computed exactly over Z before the final
/// reduction. max_a / max_b bound the input coefficients and size the
/// helper-prime basis.
std::vector<u128> negacyclic_dot_mod(std::span<const std::vector<u128>> a,
                                     std::span<const std::vector<u128>> b,
                                     const Modulus& m, u128 max_a, u128 max_b);

/// Ciphertext tensor step of the scheme's multiplication: symmetric lifts of
/// both operand pairs (canonical mod q), exact integer tensor product
/// (d0, d1, d2) = (a0·b0, a0·b1 + a1·b0, a1·b1) over Z, then per-coefficient
/// rounding of num·v/den to the nearest integer, reduced mod q.
std::array<std::vector<u128>, 3> tensor_scale_mod(
    std::span<const u128> a0, std::span<const u128> a1, std::span<const u128> b0,
    std::span<const u128> b1, const Modulus& q, u128 num, u128 den);

/// out[i] = round(num · centered(v[i]) / den) mod m_out, v canonical mod m_in.
/// Exact for arbitrary widths (num·v may exceed 128 bits).
std::vector<u128> scale_round_mod(std::span<const u128> v, const Modulus& m_in,
                                  u128 num, u128 den, const Modulus& m_out);

}  // namespace hematch
