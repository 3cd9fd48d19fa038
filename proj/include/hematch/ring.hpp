// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "hematch/int128.hpp"
#include "hematch/modulus.hpp"
#include "hematch/rng.hpp"

namespace hematch {

/// Truncated discrete Gaussian over the integers: weights proportional to
/// exp(-k^2 / (2 sigma^2)) on [-truncation_bound, truncation_bound].
struct NoiseDistribution {
  double sigma = 3.2;
  int truncation_bound = 20;
};

/// Element of R_m = Z_m[x] / (x^n + 1) with n a power of two. Coefficients are
/// kept canonical in [0, m).
class RingElement {
 public:
  RingElement() = default;
  RingElement(std::size_t n, const Modulus& m);

  std::size_t degree_bound() const { return coeffs_.size(); }
  const Modulus& modulus() const { return modulus_; }
  const std::vector<u128>& coeffs() const { return coeffs_; }
  std::vector<u128>& coeffs() { return coeffs_; }
  u128 operator[](std::size_t i) const { return coeffs_[i]; }
  u128& operator[](std::size_t i) { return coeffs_[i]; }

  bool is_zero() const;
  /// Largest centered-magnitude coefficient.
  u128 linf_norm() const;
  std::vector<s128> to_signed() const;

  friend bool operator==(const RingElement& a, const RingElement& b) {
    return a.modulus_ == b.modulus_ && a.coeffs_ == b.coeffs_;
  }

 private:
  Modulus modulus_;
  std::vector<u128> coeffs_;
};

RingElement ring_add(const RingElement& a, const RingElement& b);
RingElement ring_sub(const RingElement& a, const RingElement& b);
RingElement ring_negate(const RingElement& a);
/// Negacyclic product, exact for every modulus (word-size NTT lanes with CRT
/// recombination behind the scenes).
RingElement ring_mul(const RingElement& a, const RingElement& b);
/// O(n^2) reference product. Slow; kept as the independent oracle and as the
/// fallback that works without any precomputation.
RingElement ring_mul_schoolbook(const RingElement& a, const RingElement& b);
RingElement ring_mul_scalar(const RingElement& a, u128 s);

/// x^i ↦ x^(i·g mod 2n) for odd g; x^n = -1 folds exponents with a sign flip.
RingElement apply_automorphism(const RingElement& a, std::uint64_t g);

RingElement sample_uniform(std::size_t n, const Modulus& m, SeedableRng& rng);
/// Uniform over {0, 1}^n, the key/encryption randomness domain.
RingElement sample_binary(std::size_t n, const Modulus& m, SeedableRng& rng);
/// Centered noise draws, before any modular lift.
std::vector<std::int32_t> sample_noise_signed(std::size_t n, const NoiseDistribution& dist,
                                              SeedableRng& rng);
/// Noise lifted into R_m (negative draws map to m - |e|).
RingElement sample_noise(std::size_t n, const NoiseDistribution& dist, const Modulus& m,
                         SeedableRng& rng);

RingElement from_signed(std::size_t n, const Modulus& m, const std::vector<std::int32_t>& v);

/// Base-w digit polynomials d_0..d_l with a = sum_k w^k d_k and digits in
/// [0, w); l = floor(log_w m) so every canonical coefficient is covered.
std::vector<RingElement> base_decompose(const RingElement& a, std::uint64_t w);
/// Number of digits base_decompose produces for modulus m and base w.
std::size_t decompose_digit_count(const Modulus& m, std::uint64_t w);
/// Test helper: sum_k w^k d_k mod m.
RingElement base_recompose(const std::vector<RingElement>& digits, std::uint64_t w);

}  // namespace hematch
