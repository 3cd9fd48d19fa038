// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Arithmetic layer: Barrett fields, NTT ring multiplication against a
// schoolbook oracle, rounding/scaling primitives, samplers, base digits.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hematch/modulus.hpp"
#include "hematch/ntt.hpp"
#include "hematch/ring.hpp"
#include "hematch/rng.hpp"

using namespace hematch;

TEST_CASE("seedable rng is deterministic and distinct across seeds") {
  SeedableRng r1(42), r2(42), r3(43);
  std::uint64_t a = r1.next_u64();
  CHECK(a == r2.next_u64());
  CHECK(a != r3.next_u64());
  for (int i = 0; i < 1000; ++i) CHECK(r1.next_u64() == r2.next_u64());
}

TEST_CASE("barrett field matches plain modular arithmetic") {
  SeedableRng rng(7);
  int tested = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    std::uint64_t bits = 2 + rng.next_u64() % 60;
    std::uint64_t p = (rng.next_u64() >> (64 - bits)) | (1ULL << (bits - 1)) | 1ULL;
    if (p < 3 || !is_prime(p)) continue;
    PrimeField f(p);
    std::uint64_t a = rng.next_u64() % p, b = rng.next_u64() % p;
    REQUIRE(f.mul(a, b) == static_cast<std::uint64_t>((u128)a * b % p));
    u128 v = rng.next_u128() >> 1;
    REQUIRE(f.reduce_u128(v) == static_cast<std::uint64_t>(v % p));
    ++tested;
  }
  CHECK(tested > 10000);  // the rejection loop must not starve the test
}

bool is_prime_naive(std::uint64_t v) {
  if (v < 2) return false;
  for (std::uint64_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

TEST_CASE("primality test agrees with trial division") {
  int primes = 0;
  for (std::uint64_t v = 2; v < 4000; ++v) {
    bool want = is_prime_naive(v);
    REQUIRE(is_prime(v) == want);
    primes += want;
  }
  CHECK(primes == 550);  // pi(4000)
}

TEST_CASE("largest_prime_below returns NTT-friendly primes") {
  u128 p = largest_prime_below(110, 2048);
  CHECK(p % 2048 == 1);
  CHECK(p < (static_cast<u128>(1) << 110));
  // small enough to verify maximality by scanning the whole residue class
  u128 small = largest_prime_below(17, 2 * 1024);
  CHECK(small % 2048 == 1);
  CHECK(small < (1u << 17));
  CHECK(is_prime_naive(static_cast<std::uint64_t>(small)));
  for (u128 cand = small + 2048; cand < (1u << 17); cand += 2048)
    CHECK(!is_prime_naive(static_cast<std::uint64_t>(cand)));
}

TEST_CASE("ntt tables roundtrip forward/inverse") {
  SeedableRng rng(11);
  for (std::size_t n : {1UL, 2UL, 8UL, 64UL, 256UL, 1024UL}) {
    auto tabs = helper_tables(n, 120);
    REQUIRE(!tabs.empty());
    for (auto* t : tabs) {
      std::vector<std::uint64_t> a(n), orig(n);
      for (auto& x : a) x = rng.next_u64() % t->prime();
      orig = a;
      t->forward(a.data());
      t->inverse(a.data());
      REQUIRE(a == orig);
    }
  }
}

TEST_CASE("ring_mul equals schoolbook negacyclic convolution") {
  SeedableRng rng(13);
  for (std::size_t n : {1UL, 2UL, 8UL, 64UL, 256UL, 1024UL}) {
    for (int bits : {12, 17, 40, 77, 110}) {
      u128 mv = (rng.next_u128() >> (128 - bits)) | (static_cast<u128>(1) << (bits - 1));
      if (mv < 2) mv = 2;
      Modulus m(mv);
      RingElement a = sample_uniform(n, m, rng), b = sample_uniform(n, m, rng);
      REQUIRE(ring_mul(a, b) == ring_mul_schoolbook(a, b));
    }
  }
}

TEST_CASE("negacyclic wraparound: x^(n-1) * x = -1") {
  Modulus m(static_cast<u128>(40961));
  RingElement a(8, m), b(8, m);
  a[7] = 1;
  b[1] = 1;
  RingElement c = ring_mul(a, b);
  CHECK(c[0] == 40960);  // -1 mod t
  for (std::size_t i = 1; i < 8; ++i) CHECK(c[i] == 0);
}

TEST_CASE("ring add/sub/negate are coefficient-wise mod q") {
  SeedableRng rng(17);
  Modulus m(largest_prime_below(60, 128));
  RingElement a = sample_uniform(64, m, rng), b = sample_uniform(64, m, rng);
  RingElement s = ring_add(a, b);
  for (std::size_t i = 0; i < 64; ++i) REQUIRE(s[i] == (a[i] + b[i]) % m.value());
  RingElement d = ring_sub(a, b);
  for (std::size_t i = 0; i < 64; ++i)
    REQUIRE(d[i] == (a[i] + m.value() - b[i]) % m.value());
  RingElement n = ring_negate(a);
  CHECK(ring_add(a, n) == RingElement(64, m));
}

TEST_CASE("scale_round_mod performs nearest-integer scaled reduction") {
  Modulus q(static_cast<u128>(1) << 60);
  Modulus t(static_cast<u128>(40961));
  std::vector<u128> v = {0, q.value() / 40961, q.value() - 5};
  auto r = scale_round_mod(v, q, 40961, q.value(), t);
  CHECK(r[0] == 0);
  CHECK(r[1] == 1);
  CHECK(r[2] == 0);  // q-5 scales to ~t, wraps to 0
}

TEST_CASE("negacyclic_dot_mod equals sum of schoolbook products") {
  Modulus m(largest_prime_below(61, 16));
  SeedableRng rng(9);
  std::vector<std::vector<u128>> as, bs;
  RingElement acc(16, m);
  for (int i = 0; i < 3; ++i) {
    RingElement a = sample_uniform(16, m, rng), b = sample_uniform(16, m, rng);
    as.push_back(a.coeffs());
    bs.push_back(b.coeffs());
    acc = ring_add(acc, ring_mul_schoolbook(a, b));
  }
  CHECK(negacyclic_dot_mod(as, bs, m, m.value() - 1, m.value() - 1) == acc.coeffs());
}

TEST_CASE("gaussian noise sampler has expected spread and hard bound") {
  NoiseDistribution nd;
  SeedableRng rng(5);
  auto v = sample_noise_signed(200000, nd, rng);
  double mean = 0, var = 0;
  for (auto x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (auto x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::sqrt(var) == doctest::Approx(nd.sigma).epsilon(0.05));
  for (auto x : v) REQUIRE((x >= -nd.truncation_bound && x <= nd.truncation_bound));
}

TEST_CASE("binary secret sampler stays in {0,1} and is balanced") {
  SeedableRng rng(23);
  Modulus m(largest_prime_below(60, 128));
  RingElement s = sample_binary(1024, m, rng);
  int ones = 0;
  for (std::size_t i = 0; i < 1024; ++i) {
    REQUIRE((s[i] == 0 || s[i] == 1));
    ones += s[i] == 1;
  }
  CHECK(ones > 400);
  CHECK(ones < 624);
}

TEST_CASE("base decomposition recomposes exactly") {
  Modulus m(largest_prime_below(110, 2048));
  SeedableRng rng(6);
  RingElement a = sample_uniform(1024, m, rng);
  for (std::uint64_t w : {1ULL << 8, 1ULL << 20, 1ULL << 32}) {
    auto d = base_decompose(a, w);
    // ceil(110 / log2(w)) digits
    std::size_t bits = static_cast<std::size_t>(std::llround(std::log2(double(w))));
    CHECK(d.size() == (110 + bits - 1) / bits);
    for (const auto& digit : d)
      for (std::size_t i = 0; i < 1024; ++i) REQUIRE(digit[i] < w);
    REQUIRE(base_recompose(d, w) == a);
  }
}
