// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hematch/bytes.hpp"
#include "hematch/modulus.hpp"
#include "hematch/ring.hpp"

namespace hematch {

/// Immutable encryption parameter set. q is prime and ≡ 1 (mod 2n); the
/// effective plaintext modulus t is the product of the listed moduli, and
/// batching is available when every factor is prime and ≡ 1 (mod 2n).
class EncryptionParams {
 public:
  /// q chosen as the largest prime ≡ 1 (mod 2n) below 2^q_bits.
  EncryptionParams(std::size_t n, int q_bits, std::vector<std::uint64_t> plain_moduli,
                   std::uint64_t w, NoiseDistribution noise = {}, int security_level = 0);
  /// Explicit q (must still be prime and ≡ 1 (mod 2n)).
  EncryptionParams(std::size_t n, u128 q, std::vector<std::uint64_t> plain_moduli,
                   std::uint64_t w, NoiseDistribution noise = {}, int security_level = 0);

  std::size_t n() const { return n_; }
  const Modulus& q() const { return q_; }
  const std::vector<std::uint64_t>& plain_moduli() const { return plain_moduli_; }
  /// Effective plaintext modulus (product of the factors).
  const Modulus& t() const { return t_; }
  std::uint64_t w() const { return w_; }
  const NoiseDistribution& noise() const { return noise_; }
  int security_level() const { return security_level_; }
  /// floor(q / t), the plaintext scaling factor.
  u128 delta() const { return delta_; }
  bool batching() const { return batching_; }

  /// Per-residue views for evaluation modulo a single plaintext factor t_i.
  /// Deep circuits at a composite t run once per residue and recombine by CRT
  /// at decode; key material is independent of t, so residues share keys.
  std::size_t residue_count() const { return plain_moduli_.size(); }
  Modulus residue_modulus(std::size_t idx) const;
  /// floor(q / t_idx), the per-residue plaintext scaling factor.
  u128 delta_residue(std::size_t idx) const;

  /// Slot geometry: two rows of n/2 slots each.
  std::size_t slot_count() const { return n_; }
  std::size_t row_size() const { return n_ / 2; }

  const std::array<unsigned char, 32>& digest() const { return digest_; }

  friend bool operator==(const EncryptionParams& a, const EncryptionParams& b) {
    return a.digest_ == b.digest_;
  }
  friend bool operator!=(const EncryptionParams& a, const EncryptionParams& b) {
    return !(a == b);
  }

 private:
  void finish();

  std::size_t n_;
  Modulus q_;
  std::vector<std::uint64_t> plain_moduli_;
  std::uint64_t w_;
  NoiseDistribution noise_;
  int security_level_;
  Modulus t_;
  u128 delta_ = 0;
  bool batching_ = false;
  std::array<unsigned char, 32> digest_{};
};

/// Canonical parameter byte block (shared by the digest and the wire format):
/// n u32 | q byte-length u16 + q bytes | modulus count u8 + each u64 | w u64,
/// all little endian.
void write_params_block(ByteWriter& w, const EncryptionParams& p);
EncryptionParams read_params_block(ByteReader& r);

/// Shipped presets. Names follow "l<level>_n<degree>" with an optional "_t2"
/// suffix for the two-factor plaintext modulus used at fine quantization.
std::vector<std::string> preset_names();
EncryptionParams preset_params(const std::string& name);
/// Smallest shipped preset whose row capacity holds d features at the given
/// security level (128 or 192); two-factor variant when two_t is set.
EncryptionParams preset_for_dimension(std::size_t d, int security_level, bool two_t = false);

}  // namespace hematch
