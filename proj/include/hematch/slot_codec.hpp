// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hematch/fv.hpp"
#include "hematch/params.hpp"

namespace hematch {

/// A unit-norm real feature vector mapped to integers at quantization step
/// delta: values[i] = round(v[i] / delta), half away from zero.
struct QuantizedTemplate {
  std::vector<std::int64_t> values;
  double delta = 0.0;
  std::size_t dim = 0;
};

/// Round a unit vector (‖v‖₂ = 1 within 1e-6, else std::domain_error) to
/// integer multiples of delta.
QuantizedTemplate quantize(std::span<const double> v, double delta);

/// Map a decrypted inner-product integer back to a dissimilarity:
/// 1 - delta²·score.
double dequantize_score(std::int64_t score, double delta);

/// Reject (delta, params) combinations whose worst-case integer score could
/// wrap the plaintext modulus: requires t > 2·(⌈1/delta⌉+1)²·1.05.
void check_score_range(double delta, const EncryptionParams& params);

/// Pack up to slot_count signed integers into a plaintext polynomial whose
/// slot evaluations equal the values (remaining slots zero). Slots are laid
/// out as two rows of n/2: row rotations move slots within each row, the row
/// swap exchanges them. Requires batching-capable parameters (every plaintext
/// factor prime and ≡ 1 mod 2n); more values than slots is a capacity error.
/// The composite-modulus form packs every residue into one polynomial mod t.
Plaintext encode_slots(std::span<const std::int64_t> values, const EncryptionParams& params);
/// Inverse of encode_slots; values come back in the symmetric range
/// [-t/2, t/2).
std::vector<std::int64_t> decode_slots(const Plaintext& pt, const EncryptionParams& params);

/// Single-residue forms for per-residue evaluation: the polynomial lives mod
/// the chosen plaintext factor, values reduce into [0, t_residue).
Plaintext encode_slots_residue(std::span<const std::int64_t> values,
                               const EncryptionParams& params, std::size_t residue);
std::vector<std::uint64_t> decode_slots_residue(const Plaintext& pt,
                                                const EncryptionParams& params,
                                                std::size_t residue);

/// Recombine one value's residues (canonical mod each plaintext factor) into
/// the symmetric range via the Chinese remainder theorem.
std::int64_t crt_combine_signed(std::span<const std::uint64_t> residues,
                                const EncryptionParams& params);

/// Base-w integer encoding: digits of |a| as coefficients (least significant
/// first), the sign applied to every digit; decoding evaluates at x = w.
/// |a| > wⁿ - 1 is an overflow error.
Plaintext encode_scalar(std::int64_t a, std::uint64_t w, std::size_t n, const Modulus& t);
std::int64_t decode_scalar(const Plaintext& pt, std::uint64_t w);

/// Sum of base-w digit magnitudes of |a| — the coefficient-growth measure
/// used by the element-wise overflow guard.
std::uint64_t digit_l1(std::int64_t a, std::uint64_t w);

}  // namespace hematch
