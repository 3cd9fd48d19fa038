// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hematch/keys.hpp"
#include "hematch/params.hpp"

namespace hematch {

/// Polynomial message in R_t (t the effective plaintext modulus).
struct Plaintext {
  RingElement poly;
};

/// Scale-invariant ciphertext: two ring elements mod q tagged with the
/// parameter digest and the generating key id.
struct Ciphertext {
  std::vector<RingElement> parts;
  std::array<unsigned char, 32> params_digest{};
  std::uint64_t key_id = 0;
};

Plaintext make_plaintext(const EncryptionParams& params);

SecretKey gen_secret_key(const EncryptionParams& params, SeedableRng& rng);
PublicKey gen_public_key(const SecretKey& sk, const EncryptionParams& params, SeedableRng& rng);
EvaluationKey gen_evaluation_key(const SecretKey& sk, const EncryptionParams& params,
                                 SeedableRng& rng);
KeySwitchKey gen_keyswitch_key(const SecretKey& source, const SecretKey& target,
                               const EncryptionParams& params, SeedableRng& rng);

/// One switch key per requested rotation step (taken mod the row size; step 0
/// needs no key) plus, when include_row_swap is set, the row-swap exponent.
GaloisKeySet gen_galois_keys(const SecretKey& sk, const EncryptionParams& params,
                             std::span<const int> steps, bool include_row_swap,
                             SeedableRng& rng);
/// Power-of-two steps 1, 2, ..., row_size/2: what sum_slots consumes.
std::vector<int> sum_slots_steps(const EncryptionParams& params);

/// Automorphism exponent 3^step used for a row rotation by `step`.
std::uint64_t galois_exponent_for_step(int step, std::size_t n);
/// Automorphism exponent 2n-1 that swaps the two slot rows.
std::uint64_t row_swap_exponent(std::size_t n);

Ciphertext encrypt(const Plaintext& pt, const PublicKey& pk, const EncryptionParams& params,
                   SeedableRng& rng);
Plaintext decrypt(const Ciphertext& ct, const SecretKey& sk, const EncryptionParams& params);

/// Per-residue variants for composite plaintext moduli: the plaintext lives
/// modulo the single factor t_residue and scales by floor(q / t_residue).
/// Evaluating once per residue keeps the multiply noise proportional to the
/// small factor instead of the full product; decode recombines by CRT. Key
/// material is shared — t never enters key generation.
Ciphertext encrypt_residue(const Plaintext& pt, const PublicKey& pk,
                           const EncryptionParams& params, std::size_t residue, SeedableRng& rng);
Plaintext decrypt_residue(const Ciphertext& ct, const SecretKey& sk,
                          const EncryptionParams& params, std::size_t residue);

Ciphertext hom_add(const Ciphertext& a, const Ciphertext& b, const EncryptionParams& params);
/// Tensor, rescale by t/q, then relinearize back to two parts.
Ciphertext hom_multiply(const Ciphertext& a, const Ciphertext& b, const EvaluationKey& ek,
                        const EncryptionParams& params);
/// Multiplication for ciphertexts produced by encrypt_residue: the tensor
/// rescales by t_residue/q instead of t/q.
Ciphertext hom_multiply_residue(const Ciphertext& a, const Ciphertext& b, const EvaluationKey& ek,
                                const EncryptionParams& params, std::size_t residue);
/// Re-encrypt toward ksk's target key without decrypting.
Ciphertext key_switch(const Ciphertext& ct, const KeySwitchKey& ksk,
                      const EncryptionParams& params);

/// Rotate both slot rows left by `step` positions (negative steps rotate
/// right). Requires the matching key in gks.
Ciphertext rotate_slots(const Ciphertext& ct, int step, const GaloisKeySet& gks,
                        const EncryptionParams& params);
Ciphertext swap_rows(const Ciphertext& ct, const GaloisKeySet& gks,
                     const EncryptionParams& params);
/// Rotate-and-add ladder plus one row swap; afterwards every slot holds the
/// sum of all slots.
Ciphertext sum_slots(const Ciphertext& ct, const GaloisKeySet& gks,
                     const EncryptionParams& params);

/// Remaining headroom in bits: floor(log2(q / (2t)) - log2(noise_inf_norm)).
/// At least 1 guarantees correct decryption; may go negative once noise has
/// swallowed the plaintext.
int noise_budget(const Ciphertext& ct, const SecretKey& sk, const EncryptionParams& params);
/// Headroom of a ciphertext produced by encrypt_residue.
int noise_budget_residue(const Ciphertext& ct, const SecretKey& sk,
                         const EncryptionParams& params, std::size_t residue);

}  // namespace hematch
