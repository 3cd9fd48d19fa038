// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/fv.hpp"

#include <gmp.h>

#include <stdexcept>

#include "hematch/errors.hpp"
#include "hematch/ntt.hpp"
#include "mpz_util.hpp"

namespace hematch {

namespace {

void check_params(const Ciphertext& ct, const EncryptionParams& params, const char* where) {
  if (ct.params_digest != params.digest())
    throw ParameterMismatchError(std::string(where) + ": ciphertext built under other parameters");
}

void check_two_parts(const Ciphertext& ct, const char* where) {
  if (ct.parts.size() != 2)
    throw std::invalid_argument(std::string(where) + ": expected a two-part ciphertext");
}

/// Switching material: pairs (k0_i, k1_i) = (-(a_i·s_tgt + e_i) + w^i·hidden, a_i).
std::vector<KswPair> make_ksw_pairs(const RingElement& hidden, const RingElement& s_target,
                                    const EncryptionParams& params, SeedableRng& rng) {
  const std::size_t n = params.n();
  const Modulus& q = params.q();
  const std::size_t levels = decompose_digit_count(q, params.w());
  std::vector<KswPair> pairs;
  pairs.reserve(levels);
  u128 wi = 1;
  for (std::size_t i = 0; i < levels; ++i) {
    RingElement a = sample_uniform(n, q, rng);
    RingElement e = sample_noise(n, params.noise(), q, rng);
    RingElement k0 = ring_sub(ring_mul_scalar(hidden, wi), ring_add(ring_mul(a, s_target), e));
    pairs.push_back(KswPair{std::move(k0), std::move(a)});
    wi = mul_mod(wi, params.w(), q.value());
  }
  return pairs;
}

/// c0 += sum_i k0_i·d_i, c1' = sum_i k1_i·d_i for digits d_i of `switched`.
void apply_switch(const RingElement& switched, const std::vector<KswPair>& pairs,
                  const EncryptionParams& params, RingElement& c0, RingElement& c1) {
  const Modulus& q = params.q();
  std::vector<RingElement> digits = base_decompose(switched, params.w());
  if (digits.size() != pairs.size())
    throw ParameterMismatchError("key switch: digit count does not match key material");
  std::vector<std::vector<u128>> dv(digits.size()), k0v(digits.size()), k1v(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) {
    dv[i] = digits[i].coeffs();
    k0v[i] = pairs[i].k0.coeffs();
    k1v[i] = pairs[i].k1.coeffs();
  }
  const u128 max_digit = static_cast<u128>(params.w()) - 1;
  RingElement acc0(params.n(), q), acc1(params.n(), q);
  acc0.coeffs() = negacyclic_dot_mod(dv, k0v, q, max_digit, q.value() - 1);
  acc1.coeffs() = negacyclic_dot_mod(dv, k1v, q, max_digit, q.value() - 1);
  c0 = ring_add(c0, acc0);
  c1 = acc1;
}

Ciphertext apply_galois(const Ciphertext& ct, std::uint64_t g, const GaloisKeySet& gks,
                        const EncryptionParams& params, const char* what) {
  check_params(ct, params, what);
  check_two_parts(ct, what);
  if (ct.key_id != gks.key_id)
    throw KeyMismatchError(std::string(what) + ": rotation keys belong to a different secret");
  auto it = gks.keys.find(g);
  if (it == gks.keys.end())
    throw KeyMismatchError(std::string(what) + ": no key for automorphism exponent " +
                           std::to_string(g));
  RingElement c0 = apply_automorphism(ct.parts[0], g);
  RingElement c1g = apply_automorphism(ct.parts[1], g);
  RingElement c1(params.n(), params.q());
  apply_switch(c1g, it->second.pairs, params, c0, c1);
  Ciphertext out;
  out.parts = {std::move(c0), std::move(c1)};
  out.params_digest = ct.params_digest;
  out.key_id = ct.key_id;
  return out;
}

}  // namespace

Plaintext make_plaintext(const EncryptionParams& params) {
  return Plaintext{RingElement(params.n(), params.t())};
}

SecretKey gen_secret_key(const EncryptionParams& params, SeedableRng& rng) {
  SecretKey sk;
  sk.key_id = rng.next_u64();
  sk.s = sample_binary(params.n(), params.q(), rng);
  return sk;
}

PublicKey gen_public_key(const SecretKey& sk, const EncryptionParams& params, SeedableRng& rng) {
  PublicKey pk;
  pk.key_id = sk.key_id;
  RingElement a = sample_uniform(params.n(), params.q(), rng);
  RingElement e = sample_noise(params.n(), params.noise(), params.q(), rng);
  pk.p0 = ring_negate(ring_add(ring_mul(a, sk.s), e));
  pk.p1 = std::move(a);
  return pk;
}

EvaluationKey gen_evaluation_key(const SecretKey& sk, const EncryptionParams& params,
                                 SeedableRng& rng) {
  EvaluationKey ek;
  ek.key_id = sk.key_id;
  ek.pairs = make_ksw_pairs(ring_mul(sk.s, sk.s), sk.s, params, rng);
  return ek;
}

KeySwitchKey gen_keyswitch_key(const SecretKey& source, const SecretKey& target,
                               const EncryptionParams& params, SeedableRng& rng) {
  KeySwitchKey k;
  k.source_key_id = source.key_id;
  k.target_key_id = target.key_id;
  k.pairs = make_ksw_pairs(source.s, target.s, params, rng);
  return k;
}

std::uint64_t galois_exponent_for_step(int step, std::size_t n) {
  if (n < 4) throw std::invalid_argument("slot rotation needs n >= 4");
  const std::uint64_t row = n / 2;
  std::uint64_t s = ((step % static_cast<long long>(row)) + static_cast<long long>(row)) %
                    static_cast<long long>(row);
  return static_cast<std::uint64_t>(pow_mod(3, s, 2 * static_cast<u128>(n)));
}

std::uint64_t row_swap_exponent(std::size_t n) { return 2 * n - 1; }

GaloisKeySet gen_galois_keys(const SecretKey& sk, const EncryptionParams& params,
                             std::span<const int> steps, bool include_row_swap,
                             SeedableRng& rng) {
  GaloisKeySet set;
  set.key_id = sk.key_id;
  auto add_exponent = [&](std::uint64_t g) {
    if (set.keys.count(g)) return;
    KeySwitchKey k;
    k.source_key_id = sk.key_id;
    k.target_key_id = sk.key_id;
    k.pairs = make_ksw_pairs(apply_automorphism(sk.s, g), sk.s, params, rng);
    set.keys.emplace(g, std::move(k));
  };
  for (int step : steps) {
    std::uint64_t g = galois_exponent_for_step(step, params.n());
    if (g == 1) continue;  // rotation by 0
    add_exponent(g);
  }
  if (include_row_swap) add_exponent(row_swap_exponent(params.n()));
  return set;
}

std::vector<int> sum_slots_steps(const EncryptionParams& params) {
  std::vector<int> steps;
  for (std::size_t s = 1; s < params.row_size(); s <<= 1) steps.push_back(static_cast<int>(s));
  return steps;
}

namespace {

Ciphertext encrypt_scaled(const Plaintext& pt, const PublicKey& pk, const EncryptionParams& params,
                          const Modulus& t, u128 delta, SeedableRng& rng, const char* where) {
  if (pt.poly.modulus() != t || pt.poly.degree_bound() != params.n())
    throw ParameterMismatchError(std::string(where) + ": plaintext does not match parameters");
  const std::size_t n = params.n();
  const Modulus& q = params.q();
  RingElement u = sample_binary(n, q, rng);
  RingElement e1 = sample_noise(n, params.noise(), q, rng);
  RingElement e2 = sample_noise(n, params.noise(), q, rng);

  RingElement scaled(n, q);  // delta·m, already canonical: delta·(t-1) < q
  for (std::size_t i = 0; i < n; ++i) scaled[i] = delta * pt.poly[i];

  Ciphertext ct;
  ct.params_digest = params.digest();
  ct.key_id = pk.key_id;
  ct.parts.push_back(ring_add(scaled, ring_add(ring_mul(pk.p0, u), e1)));
  ct.parts.push_back(ring_add(ring_mul(pk.p1, u), e2));
  return ct;
}

Plaintext decrypt_scaled(const Ciphertext& ct, const SecretKey& sk, const EncryptionParams& params,
                         const Modulus& t, const char* where) {
  check_params(ct, params, where);
  check_two_parts(ct, where);
  if (ct.key_id != sk.key_id)
    throw KeyMismatchError(std::string(where) + ": ciphertext was produced under a different key");
  RingElement v = ring_add(ct.parts[0], ring_mul(ct.parts[1], sk.s));
  Plaintext pt{RingElement(params.n(), t)};
  pt.poly.coeffs() = scale_round_mod(v.coeffs(), params.q(), t.value(), params.q().value(), t);
  return pt;
}

}  // namespace

Ciphertext encrypt(const Plaintext& pt, const PublicKey& pk, const EncryptionParams& params,
                   SeedableRng& rng) {
  return encrypt_scaled(pt, pk, params, params.t(), params.delta(), rng, "encrypt");
}

Plaintext decrypt(const Ciphertext& ct, const SecretKey& sk, const EncryptionParams& params) {
  return decrypt_scaled(ct, sk, params, params.t(), "decrypt");
}

Ciphertext encrypt_residue(const Plaintext& pt, const PublicKey& pk,
                           const EncryptionParams& params, std::size_t residue,
                           SeedableRng& rng) {
  return encrypt_scaled(pt, pk, params, params.residue_modulus(residue),
                        params.delta_residue(residue), rng, "encrypt_residue");
}

Plaintext decrypt_residue(const Ciphertext& ct, const SecretKey& sk,
                          const EncryptionParams& params, std::size_t residue) {
  return decrypt_scaled(ct, sk, params, params.residue_modulus(residue), "decrypt_residue");
}

Ciphertext hom_add(const Ciphertext& a, const Ciphertext& b, const EncryptionParams& params) {
  check_params(a, params, "hom_add");
  check_params(b, params, "hom_add");
  check_two_parts(a, "hom_add");
  check_two_parts(b, "hom_add");
  if (a.key_id != b.key_id)
    throw KeyMismatchError("hom_add: operands encrypted under different keys");
  Ciphertext out;
  out.params_digest = a.params_digest;
  out.key_id = a.key_id;
  out.parts.push_back(ring_add(a.parts[0], b.parts[0]));
  out.parts.push_back(ring_add(a.parts[1], b.parts[1]));
  return out;
}

namespace {

/// Tensor, rescale the integer tensor by t_scale/q, then relinearize; t_scale
/// is the plaintext modulus the operands were scaled against (the full t, or
/// one factor of it for per-residue ciphertexts).
Ciphertext multiply_scaled(const Ciphertext& a, const Ciphertext& b, const EvaluationKey& ek,
                           const EncryptionParams& params, u128 t_scale) {
  check_params(a, params, "hom_multiply");
  check_params(b, params, "hom_multiply");
  check_two_parts(a, "hom_multiply");
  check_two_parts(b, "hom_multiply");
  if (a.key_id != b.key_id)
    throw KeyMismatchError("hom_multiply: operands encrypted under different keys");
  if (a.key_id != ek.key_id)
    throw KeyMismatchError("hom_multiply: evaluation key belongs to a different secret");

  const Modulus& q = params.q();
  auto scaled = tensor_scale_mod(a.parts[0].coeffs(), a.parts[1].coeffs(), b.parts[0].coeffs(),
                                 b.parts[1].coeffs(), q, t_scale, q.value());

  RingElement c0(params.n(), q), c1(params.n(), q), c2(params.n(), q);
  c0.coeffs() = std::move(scaled[0]);
  c1.coeffs() = std::move(scaled[1]);
  c2.coeffs() = std::move(scaled[2]);

  // Relinearize the degree-2 part back onto (c0, c1).
  RingElement r0 = c0, r1(params.n(), q);
  apply_switch(c2, ek.pairs, params, r0, r1);
  r1 = ring_add(r1, c1);

  Ciphertext out;
  out.params_digest = a.params_digest;
  out.key_id = a.key_id;
  out.parts = {std::move(r0), std::move(r1)};
  return out;
}

}  // namespace

Ciphertext hom_multiply(const Ciphertext& a, const Ciphertext& b, const EvaluationKey& ek,
                        const EncryptionParams& params) {
  return multiply_scaled(a, b, ek, params, params.t().value());
}

Ciphertext hom_multiply_residue(const Ciphertext& a, const Ciphertext& b, const EvaluationKey& ek,
                                const EncryptionParams& params, std::size_t residue) {
  return multiply_scaled(a, b, ek, params, params.residue_modulus(residue).value());
}

Ciphertext key_switch(const Ciphertext& ct, const KeySwitchKey& ksk,
                      const EncryptionParams& params) {
  check_params(ct, params, "key_switch");
  check_two_parts(ct, "key_switch");
  if (ct.key_id != ksk.source_key_id)
    throw KeyMismatchError("key_switch: ciphertext key does not match the switch key source");
  RingElement c0 = ct.parts[0];
  RingElement c1(params.n(), params.q());
  apply_switch(ct.parts[1], ksk.pairs, params, c0, c1);
  Ciphertext out;
  out.parts = {std::move(c0), std::move(c1)};
  out.params_digest = ct.params_digest;
  out.key_id = ksk.target_key_id;
  return out;
}

Ciphertext rotate_slots(const Ciphertext& ct, int step, const GaloisKeySet& gks,
                        const EncryptionParams& params) {
  std::uint64_t g = galois_exponent_for_step(step, params.n());
  if (g == 1) return ct;
  return apply_galois(ct, g, gks, params, "rotate_slots");
}

Ciphertext swap_rows(const Ciphertext& ct, const GaloisKeySet& gks,
                     const EncryptionParams& params) {
  return apply_galois(ct, row_swap_exponent(params.n()), gks, params, "swap_rows");
}

Ciphertext sum_slots(const Ciphertext& ct, const GaloisKeySet& gks,
                     const EncryptionParams& params) {
  Ciphertext acc = ct;
  for (std::size_t s = 1; s < params.row_size(); s <<= 1)
    acc = hom_add(acc, rotate_slots(acc, static_cast<int>(s), gks, params), params);
  return hom_add(acc, swap_rows(acc, gks, params), params);
}

namespace {

int noise_budget_scaled(const Ciphertext& ct, const SecretKey& sk, const EncryptionParams& params,
                        const Modulus& t, u128 delta, const char* where) {
  check_params(ct, params, where);
  check_two_parts(ct, where);
  if (ct.key_id != sk.key_id)
    throw KeyMismatchError(std::string(where) +
                           ": ciphertext was produced under a different key");
  const Modulus& q = params.q();
  RingElement v = ring_add(ct.parts[0], ring_mul(ct.parts[1], sk.s));
  Plaintext pt{RingElement(params.n(), t)};
  pt.poly.coeffs() = scale_round_mod(v.coeffs(), q, t.value(), q.value(), t);
  // noise = v - delta·m mod q, centered
  RingElement dm(params.n(), q);
  for (std::size_t i = 0; i < params.n(); ++i) dm[i] = delta * pt.poly[i];
  u128 norm = ring_sub(v, dm).linf_norm();

  detail::Mpz A, B;
  detail::mpz_set_u128(A, q.value());
  detail::mpz_set_u128(B, t.value());
  mpz_mul_ui(B, B, 2);
  if (norm == 0) {
    // No noise at all: report the full headroom.
    int k = 0;
    detail::Mpz tmp(1);
    while (true) {
      mpz_mul_2exp(tmp, B, k + 1);
      if (mpz_cmp(tmp, A) > 0) break;
      ++k;
    }
    return k;
  }
  detail::Mpz nz, tmp;
  detail::mpz_set_u128(nz, norm);
  mpz_mul(B, B, nz);  // B = 2·t·norm
  if (mpz_cmp(B, A) <= 0) {
    int k = 0;
    while (true) {
      mpz_mul_2exp(tmp, B, k + 1);
      if (mpz_cmp(tmp, A) > 0) break;
      ++k;
    }
    return k;
  }
  // A < B: floor(log2(A/B)) = -j for the smallest j with A·2^j >= B.
  int j = 0;
  while (true) {
    mpz_mul_2exp(tmp, A, j);
    if (mpz_cmp(tmp, B) >= 0) break;
    ++j;
  }
  return -j;
}

}  // namespace

int noise_budget(const Ciphertext& ct, const SecretKey& sk, const EncryptionParams& params) {
  return noise_budget_scaled(ct, sk, params, params.t(), params.delta(), "noise_budget");
}

int noise_budget_residue(const Ciphertext& ct, const SecretKey& sk,
                         const EncryptionParams& params, std::size_t residue) {
  return noise_budget_scaled(ct, sk, params, params.residue_modulus(residue),
                             params.delta_residue(residue), "noise_budget_residue");
}

}  // namespace hematch
