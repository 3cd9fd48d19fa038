// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hematch/int128.hpp"

namespace hematch {

/// Deterministic cryptographic byte stream (ChaCha20 keyed by a SHA-256 hash
/// of the seed). The same seed always yields the same stream, which is what
/// makes key generation and encryption reproducible under explicit seeds.
class SeedableRng {
 public:
  explicit SeedableRng(std::uint64_t seed);
  explicit SeedableRng(std::span<const unsigned char> seed);

  void fill(unsigned char* out, std::size_t len);
  std::uint64_t next_u64();
  u128 next_u128();

  /// Uniform draw from [0, bound) by rejection, bound >= 1.
  u128 uniform_below(u128 bound);

  /// Uniform double in [0, 1) with 53 bits of precision.
  double next_double();

  /// Standard normal via the Box-Muller transform.
  double next_gaussian();

  /// Derive an independent generator for a labeled subtask.
  SeedableRng fork(std::uint64_t label);

 private:
  void refill();

  std::array<unsigned char, 32> key_;
  std::array<unsigned char, 1024> buf_;
  std::size_t pos_ = 0;
  std::uint64_t block_ = 0;
  bool have_gaussian_ = false;
  double spare_gaussian_ = 0.0;
};

/// SHA-256 of a byte buffer.
std::array<unsigned char, 32> sha256(std::span<const unsigned char> data);

}  // namespace hematch
