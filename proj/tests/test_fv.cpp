// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Cryptosystem layer: encrypt/decrypt roundtrips, homomorphic add and
// multiply against the plaintext-ring schoolbook oracle, noise budgets,
// rotations, key switching, and the per-residue composite-modulus path.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hematch/errors.hpp"
#include "hematch/fv.hpp"
#include "hematch/slot_codec.hpp"

using namespace hematch;

namespace {

struct KeySet {
  SecretKey sk;
  PublicKey pk;
  EvaluationKey ek;
  GaloisKeySet gks;
};

KeySet make_keys(const EncryptionParams& p, SeedableRng& rng) {
  KeySet k;
  k.sk = gen_secret_key(p, rng);
  k.pk = gen_public_key(k.sk, p, rng);
  k.ek = gen_evaluation_key(k.sk, p, rng);
  k.gks = gen_galois_keys(k.sk, p, sum_slots_steps(p), true, rng);
  return k;
}

Plaintext random_message(const EncryptionParams& p, SeedableRng& rng) {
  Plaintext m = make_plaintext(p);
  for (auto& c : m.poly.coeffs()) c = rng.uniform_below(p.t().value());
  return m;
}

/// Plaintext-side mirror of sum_slots: the same automorphism ladder applied
/// to the ring element directly.
RingElement sum_slots_oracle(RingElement acc, const EncryptionParams& p) {
  for (std::size_t s = 1; s < p.row_size(); s <<= 1)
    acc = ring_add(acc, apply_automorphism(acc, galois_exponent_for_step((int)s, p.n())));
  return ring_add(acc, apply_automorphism(acc, row_swap_exponent(p.n())));
}

}  // namespace

TEST_CASE("encrypt/decrypt roundtrip on random messages at small presets") {
  for (const char* name : {"l128_n128", "l192_n128", "l128_n256", "l192_n256"}) {
    CAPTURE(name);
    EncryptionParams p = preset_params(name);
    SeedableRng rng(1001);
    auto k = make_keys(p, rng);
    for (int trial = 0; trial < 25; ++trial) {
      Plaintext m = random_message(p, rng);
      Ciphertext ct = encrypt(m, k.pk, p, rng);
      REQUIRE(decrypt(ct, k.sk, p).poly == m.poly);
      REQUIRE(noise_budget(ct, k.sk, p) >= 1);
    }
  }
}

TEST_CASE("homomorphic add and multiply match the schoolbook ring oracle") {
  for (const char* name : {"l128_n128", "l192_n128"}) {
    CAPTURE(name);
    EncryptionParams p = preset_params(name);
    SeedableRng rng(99);
    auto k = make_keys(p, rng);
    for (int trial = 0; trial < 10; ++trial) {
      Plaintext ma = random_message(p, rng), mb = random_message(p, rng);
      Ciphertext ca = encrypt(ma, k.pk, p, rng), cb = encrypt(mb, k.pk, p, rng);
      REQUIRE(decrypt(hom_add(ca, cb, p), k.sk, p).poly == ring_add(ma.poly, mb.poly));
      Ciphertext cm = hom_multiply(ca, cb, k.ek, p);
      REQUIRE(decrypt(cm, k.sk, p).poly == ring_mul_schoolbook(ma.poly, mb.poly));
      REQUIRE(noise_budget(cm, k.sk, p) >= 1);
    }
  }
}

TEST_CASE("noise budget decreases under multiplication and stays positive") {
  EncryptionParams p = preset_params("l128_n256");
  SeedableRng rng(5);
  auto k = make_keys(p, rng);
  Plaintext m = random_message(p, rng);
  Ciphertext ct = encrypt(m, k.pk, p, rng);
  int fresh = noise_budget(ct, k.sk, p);
  Ciphertext sq = hom_multiply(ct, ct, k.ek, p);
  int after = noise_budget(sq, k.sk, p);
  CHECK(fresh > after);
  CHECK(after >= 1);
  // Additions are cheap when the plaintext sum stays below t: 8 self-adds
  // grow the noise 9x (~3.2 bits). A message that wraps mod t would add a
  // k*(q mod t) term on top, so keep coefficients under t/9.
  Plaintext small = make_plaintext(p);
  for (auto& c : small.poly.coeffs()) c = rng.uniform_below(p.t().value() / 9);
  Ciphertext sct = encrypt(small, k.pk, p, rng);
  int sfresh = noise_budget(sct, k.sk, p);
  Ciphertext acc = sct;
  for (int i = 0; i < 8; ++i) acc = hom_add(acc, sct, p);
  int after_adds = noise_budget(acc, k.sk, p);
  CHECK(after_adds >= sfresh - 5);
  CHECK(after_adds > after);  // far cheaper than the multiply was
}

TEST_CASE("full multiply + slot-sum pipeline is exact with budget to spare at every preset") {
  for (const auto& name : preset_names()) {
    if (name.find("_t2") != std::string::npos) continue;  // composite t is per-residue
    CAPTURE(name);
    EncryptionParams p = preset_params(name);
    if (p.n() > 1024) continue;  // acceptance covers the big rings
    SeedableRng rng(2024);
    auto k = make_keys(p, rng);
    Plaintext ma = random_message(p, rng), mb = random_message(p, rng);
    Ciphertext ca = encrypt(ma, k.pk, p, rng), cb = encrypt(mb, k.pk, p, rng);
    Ciphertext piped = sum_slots(hom_multiply(ca, cb, k.ek, p), k.gks, p);
    REQUIRE(noise_budget(piped, k.sk, p) >= 1);
    REQUIRE(decrypt(piped, k.sk, p).poly ==
            sum_slots_oracle(ring_mul(ma.poly, mb.poly), p));
  }
}

TEST_CASE("rotations compose and invert") {
  EncryptionParams p = preset_params("l128_n256");
  SeedableRng rng(31);
  SecretKey sk = gen_secret_key(p, rng);
  PublicKey pk = gen_public_key(sk, p, rng);
  std::vector<int> steps{1, 2, 3, int(p.row_size()) - 1, int(p.row_size()) - 3};
  GaloisKeySet gks = gen_galois_keys(sk, p, steps, true, rng);
  Plaintext m = random_message(p, rng);
  Ciphertext ct = encrypt(m, pk, p, rng);
  SUBCASE("step then complementary step is the identity") {
    Ciphertext r = rotate_slots(rotate_slots(ct, 1, gks, p), int(p.row_size()) - 1, gks, p);
    CHECK(decrypt(r, sk, p).poly == m.poly);
  }
  SUBCASE("1 + 2 equals 3") {
    Ciphertext a = rotate_slots(rotate_slots(ct, 1, gks, p), 2, gks, p);
    Ciphertext b = rotate_slots(ct, 3, gks, p);
    CHECK(decrypt(a, sk, p).poly == decrypt(b, sk, p).poly);
  }
  SUBCASE("row swap is an involution") {
    Ciphertext r = swap_rows(swap_rows(ct, gks, p), gks, p);
    CHECK(decrypt(r, sk, p).poly == m.poly);
  }
  SUBCASE("rotation matches the plaintext automorphism") {
    Ciphertext r = rotate_slots(ct, 2, gks, p);
    CHECK(decrypt(r, sk, p).poly ==
          apply_automorphism(m.poly, galois_exponent_for_step(2, p.n())));
  }
}

TEST_CASE("key switching re-keys a ciphertext without touching the message") {
  EncryptionParams p = preset_params("l128_n256");
  SeedableRng rng(7);
  SecretKey a = gen_secret_key(p, rng), b = gen_secret_key(p, rng);
  PublicKey pka = gen_public_key(a, p, rng);
  KeySwitchKey ab = gen_keyswitch_key(a, b, p, rng);
  for (int trial = 0; trial < 10; ++trial) {
    Plaintext m = random_message(p, rng);
    Ciphertext ct = encrypt(m, pka, p, rng);
    Ciphertext swd = key_switch(ct, ab, p);
    REQUIRE(swd.key_id == b.key_id);
    REQUIRE(decrypt(swd, b, p).poly == m.poly);
    REQUIRE(noise_budget(swd, b, p) >= 1);
  }
}

TEST_CASE("key identity is enforced at decrypt, switch, multiply, and rotate") {
  EncryptionParams p = preset_params("l128_n128");
  SeedableRng rng(13);
  auto k1 = make_keys(p, rng);
  auto k2 = make_keys(p, rng);
  Plaintext m = random_message(p, rng);
  Ciphertext ct = encrypt(m, k1.pk, p, rng);
  CHECK_THROWS_AS((void)decrypt(ct, k2.sk, p), KeyMismatchError);
  KeySwitchKey ksk21 = gen_keyswitch_key(k2.sk, k1.sk, p, rng);
  CHECK_THROWS_AS((void)key_switch(ct, ksk21, p), KeyMismatchError);  // ct is under k1
  CHECK_THROWS_AS((void)hom_multiply(ct, ct, k2.ek, p), KeyMismatchError);
  CHECK_THROWS_AS((void)rotate_slots(ct, 1, k2.gks, p), KeyMismatchError);
  Ciphertext other = encrypt(m, k2.pk, p, rng);
  CHECK_THROWS_AS((void)hom_add(ct, other, p), KeyMismatchError);
  // and the valid switch direction works
  KeySwitchKey ksk12 = gen_keyswitch_key(k1.sk, k2.sk, p, rng);
  Ciphertext swd = key_switch(ct, ksk12, p);
  CHECK(decrypt(swd, k2.sk, p).poly == m.poly);
}

TEST_CASE("parameter mismatch between operands is rejected") {
  EncryptionParams p1 = preset_params("l128_n128");
  EncryptionParams p2 = preset_params("l128_n256");
  SeedableRng rng(3);
  auto k1 = make_keys(p1, rng);
  auto k2 = make_keys(p2, rng);
  Ciphertext a = encrypt(make_plaintext(p1), k1.pk, p1, rng);
  Ciphertext b = encrypt(make_plaintext(p2), k2.pk, p2, rng);
  CHECK_THROWS_AS((void)hom_add(a, b, p1), ParameterMismatchError);
}

TEST_CASE("per-residue encrypt/multiply/decrypt recombines to the composite product") {
  EncryptionParams p = preset_params("l128_n128_t2");
  REQUIRE(p.residue_count() == 2);
  SeedableRng rng(404);
  auto k = make_keys(p, rng);
  for (int trial = 0; trial < 5; ++trial) {
    // per-slot-free check on raw polynomials: value range within +-400
    std::vector<std::int64_t> xs(p.n()), ys(p.n());
    for (auto& v : xs) v = std::int64_t(rng.uniform_below(801)) - 400;
    for (auto& v : ys) v = std::int64_t(rng.uniform_below(801)) - 400;
    std::vector<std::uint64_t> got_res;
    for (std::size_t r = 0; r < p.residue_count(); ++r) {
      Modulus tr = p.residue_modulus(r);
      Plaintext ma = make_plaintext(p), mb = make_plaintext(p);
      ma.poly = RingElement(p.n(), tr);
      mb.poly = RingElement(p.n(), tr);
      for (std::size_t i = 0; i < p.n(); ++i) {
        ma.poly[i] = xs[i] >= 0 ? u128(xs[i]) : tr.value() - u128(-xs[i]);
        mb.poly[i] = ys[i] >= 0 ? u128(ys[i]) : tr.value() - u128(-ys[i]);
      }
      Ciphertext ca = encrypt_residue(ma, k.pk, p, r, rng);
      Ciphertext cb = encrypt_residue(mb, k.pk, p, r, rng);
      Ciphertext cm = hom_multiply_residue(ca, cb, k.ek, p, r);
      REQUIRE(noise_budget_residue(cm, k.sk, p, r) >= 1);
      Plaintext out = decrypt_residue(cm, k.sk, p, r);
      REQUIRE(out.poly == ring_mul_schoolbook(ma.poly, mb.poly));
      got_res.push_back(static_cast<std::uint64_t>(out.poly[0]));
    }
    // CRT recombination of coefficient 0 equals the signed integer product
    std::int64_t want = 0;
    for (std::size_t i = 0; i < p.n(); ++i) {
      std::size_t j = (p.n() - i) % p.n();
      if (i == 0)
        want += xs[0] * ys[0];
      else
        want -= xs[i] * ys[j];  // negacyclic wrap pulls a sign
    }
    CHECK(crt_combine_signed(got_res, p) == want);
  }
}

TEST_CASE("galois key set covers exactly the slot-sum ladder") {
  for (const char* name : {"l128_n128", "l128_n1024"}) {
    EncryptionParams p = preset_params(name);
    SeedableRng rng(1);
    SecretKey sk = gen_secret_key(p, rng);
    GaloisKeySet gks = gen_galois_keys(sk, p, sum_slots_steps(p), true, rng);
    CHECK(gks.keys.size() == sum_slots_steps(p).size() + 1);  // + row swap
  }
}
