// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/ntt.hpp"

#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <stdexcept>

#include "mpz_util.hpp"

namespace hematch {

namespace {

using std::size_t;
using std::uint64_t;

inline uint64_t mul_shoup(uint64_t x, uint64_t w, uint64_t w_shoup, uint64_t p) {
  uint64_t q = static_cast<uint64_t>((static_cast<u128>(x) * w_shoup) >> 64);
  uint64_t r = x * w - q * p;
  return r >= p ? r - p : r;
}

inline uint64_t shoup_precompute(uint64_t w, uint64_t p) {
  return static_cast<uint64_t>((static_cast<u128>(w) << 64) / p);
}

size_t bit_reverse(size_t v, int bits) {
  size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (v & 1);
    v >>= 1;
  }
  return r;
}

}  // namespace

PrimeField::PrimeField(uint64_t prime) : p(prime) {
  if (prime < 3 || prime >= (1ULL << 62))
    throw std::invalid_argument("PrimeField: prime must be in [3, 2^62)");
  int k = bit_length(prime);
  shift1 = k - 1;
  shift2 = k + 2;
  mu = static_cast<uint64_t>((static_cast<u128>(1) << (2 * k + 1)) / prime);
  r64 = static_cast<uint64_t>((static_cast<u128>(1) << 64) % prime);
}

NttTable::NttTable(uint64_t p, size_t n) : fq_(p), n_(n) {
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("NttTable: n must be a power of two");
  if ((p - 1) % (2 * n) != 0) throw std::invalid_argument("NttTable: need p ≡ 1 (mod 2n)");
  log_n_ = std::countr_zero(static_cast<uint64_t>(n));
  psi_ = primitive_root_2n(p, 2 * static_cast<uint64_t>(n));
  uint64_t psi_inv = fq_.inv(psi_);

  std::vector<uint64_t> pw(n), pwi(n);
  pw[0] = pwi[0] = 1;
  for (size_t i = 1; i < n; ++i) {
    pw[i] = fq_.mul(pw[i - 1], psi_);
    pwi[i] = fq_.mul(pwi[i - 1], psi_inv);
  }
  w_.resize(n);
  wi_.resize(n);
  w_shoup_.resize(n);
  wi_shoup_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    size_t r = bit_reverse(i, log_n_);
    w_[i] = pw[r];
    wi_[i] = pwi[r];
    w_shoup_[i] = shoup_precompute(w_[i], p);
    wi_shoup_[i] = shoup_precompute(wi_[i], p);
  }
  n_inv_ = fq_.inv(static_cast<uint64_t>(n % p));
  n_inv_shoup_ = shoup_precompute(n_inv_, p);
}

void NttTable::forward(uint64_t* a) const {
  const uint64_t p = fq_.p;
  size_t t = n_;
  for (size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (size_t i = 0; i < m; ++i) {
      const size_t j1 = 2 * i * t;
      const uint64_t S = w_[m + i];
      const uint64_t Ss = w_shoup_[m + i];
      for (size_t j = j1; j < j1 + t; ++j) {
        uint64_t U = a[j];
        uint64_t V = mul_shoup(a[j + t], S, Ss, p);
        uint64_t s = U + V;
        a[j] = s >= p ? s - p : s;
        a[j + t] = U >= V ? U - V : U + p - V;
      }
    }
  }
}

void NttTable::inverse(uint64_t* a) const {
  const uint64_t p = fq_.p;
  size_t t = 1;
  for (size_t m = n_; m > 1; m >>= 1) {
    size_t j1 = 0;
    const size_t h = m >> 1;
    for (size_t i = 0; i < h; ++i) {
      const uint64_t S = wi_[h + i];
      const uint64_t Ss = wi_shoup_[h + i];
      for (size_t j = j1; j < j1 + t; ++j) {
        uint64_t U = a[j];
        uint64_t V = a[j + t];
        uint64_t s = U + V;
        a[j] = s >= p ? s - p : s;
        a[j + t] = mul_shoup(U >= V ? U - V : U + p - V, S, Ss, p);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (size_t j = 0; j < n_; ++j) a[j] = mul_shoup(a[j], n_inv_, n_inv_shoup_, p);
}

std::vector<const NttTable*> helper_tables(size_t n, int min_bits) {
  struct Chain {
    std::deque<NttTable> tables;
    size_t found = 0;
    int bits = 0;
  };
  static std::mutex mu;
  static std::map<size_t, Chain> registry;

  std::lock_guard lock(mu);
  Chain& chain = registry[n];
  while (chain.bits < min_bits) {
    auto primes = ntt_prime_chain(2 * static_cast<uint64_t>(n), 1, chain.found);
    chain.tables.emplace_back(primes[0], n);
    chain.found += 1;
    chain.bits += bit_length(primes[0]) - 1;
  }
  std::vector<const NttTable*> out;
  int acc = 0;
  for (const NttTable& t : chain.tables) {
    out.push_back(&t);
    acc += bit_length(t.prime()) - 1;
    if (acc >= min_bits) break;
  }
  return out;
}

namespace {

/// Residue of a canonical value v (< 2^127) modulo a helper prime. Fast
/// division-free path for the large primes the engine uses; plain division
/// otherwise.
struct ResidueReducer {
  const PrimeField& f;
  uint64_t r62, r124;
  bool fast;
  explicit ResidueReducer(const PrimeField& field) : f(field) {
    fast = f.p > (1ULL << 61);
    r62 = static_cast<uint64_t>((static_cast<u128>(1) << 62) % f.p);
    r124 = f.mul(r62, r62);
  }
  uint64_t operator()(u128 v) const {
    if (!fast) return static_cast<uint64_t>(v % f.p);
    uint64_t a0 = static_cast<uint64_t>(v & ((static_cast<u128>(1) << 62) - 1));
    uint64_t a1 = static_cast<uint64_t>((v >> 62) & ((1ULL << 62) - 1));
    uint64_t a2 = static_cast<uint64_t>(v >> 124);
    if (a0 >= f.p) a0 -= f.p;
    if (a1 >= f.p) a1 -= f.p;
    return f.add(f.add(f.mul(a2, r124), f.mul(a1, r62)), a0);
  }
};

/// CRT basis over helper primes with enough headroom that every reconstructed
/// value satisfies |v| < P/4, which lets a float estimate of sum(c_i / p_i)
/// pick the centered representative exactly.
struct CrtBasis {
  std::vector<const NttTable*> tables;
  std::vector<double> inv_p;
  std::vector<uint64_t> yi;  // (P/p_i)^{-1} mod p_i
  std::deque<detail::Mpz> Pi;
  detail::Mpz P;

  CrtBasis(size_t n, int value_bits) {
    tables = helper_tables(n, value_bits + 2);
    mpz_set_ui(P, 1);
    for (const NttTable* t : tables) mpz_mul_ui(P, P, t->prime());
    for (const NttTable* t : tables) {
      Pi.emplace_back();
      mpz_divexact_ui(Pi.back(), P, t->prime());
      uint64_t pi_mod = mpz_fdiv_ui(Pi.back(), t->prime());
      yi.push_back(t->field().inv(pi_mod));
      inv_p.push_back(1.0 / static_cast<double>(t->prime()));
    }
  }

  size_t count() const { return tables.size(); }

  /// Reconstruct the centered value of coefficient idx from per-prime rows.
  void centered(const std::vector<std::vector<uint64_t>>& rows, size_t idx, mpz_ptr out) const {
    double frac = 0.0;
    mpz_set_ui(out, 0);
    for (size_t i = 0; i < tables.size(); ++i) {
      uint64_t ci = tables[i]->field().mul(rows[i][idx], yi[i]);
      frac += static_cast<double>(ci) * inv_p[i];
      mpz_addmul_ui(out, Pi[i], ci);
    }
    auto k = static_cast<unsigned long>(frac + 0.5);
    mpz_submul_ui(out, P, k);
  }
};

void check_same_size(size_t a, size_t b) {
  if (a != b) throw std::invalid_argument("negacyclic multiply: length mismatch");
  if (a == 0 || (a & (a - 1)) != 0)
    throw std::invalid_argument("negacyclic multiply: length must be a power of two");
}

}  // namespace

std::vector<u128> negacyclic_mul_mod(std::span<const u128> a, std::span<const u128> b,
                                     const Modulus& m) {
  check_same_size(a.size(), b.size());
  const size_t n = a.size();
  int bound_bits = bit_length(static_cast<u128>(n)) + 2 * m.bit_length() + 1;
  CrtBasis basis(n, bound_bits);

  std::vector<std::vector<uint64_t>> rows(basis.count());
  std::vector<uint64_t> ra(n), rb(n);
  for (size_t i = 0; i < basis.count(); ++i) {
    const NttTable& t = *basis.tables[i];
    ResidueReducer red(t.field());
    for (size_t j = 0; j < n; ++j) ra[j] = red(a[j]);
    for (size_t j = 0; j < n; ++j) rb[j] = red(b[j]);
    t.forward(ra.data());
    t.forward(rb.data());
    for (size_t j = 0; j < n; ++j) ra[j] = t.field().mul(ra[j], rb[j]);
    t.inverse(ra.data());
    rows[i] = ra;
  }

  detail::Mpz acc, mm;
  detail::mpz_set_u128(mm, m.value());
  std::vector<u128> out(n);
  for (size_t j = 0; j < n; ++j) {
    basis.centered(rows, j, acc);
    mpz_fdiv_r(acc, acc, mm);
    out[j] = detail::mpz_to_u128(acc);
  }
  return out;
}

std::vector<u128> negacyclic_dot_mod(std::span<const std::vector<u128>> a,
                                     std::span<const std::vector<u128>> b,
                                     const Modulus& m, u128 max_a, u128 max_b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("negacyclic_dot_mod: operand count mismatch");
  const size_t n = a[0].size();
  for (size_t i = 0; i < a.size(); ++i) check_same_size(a[i].size(), b[i].size());

  int bound_bits = bit_length(static_cast<u128>(n)) + bit_length(max_a) + bit_length(max_b) +
                   bit_length(static_cast<u128>(a.size())) + 1;
  CrtBasis basis(n, bound_bits);

  std::vector<std::vector<uint64_t>> rows(basis.count());
  std::vector<uint64_t> ra(n), rb(n);
  for (size_t i = 0; i < basis.count(); ++i) {
    const NttTable& t = *basis.tables[i];
    ResidueReducer red(t.field());
    std::vector<uint64_t> acc(n, 0);
    for (size_t k = 0; k < a.size(); ++k) {
      for (size_t j = 0; j < n; ++j) ra[j] = red(a[k][j]);
      for (size_t j = 0; j < n; ++j) rb[j] = red(b[k][j]);
      t.forward(ra.data());
      t.forward(rb.data());
      for (size_t j = 0; j < n; ++j) acc[j] = t.field().add(acc[j], t.field().mul(ra[j], rb[j]));
    }
    t.inverse(acc.data());
    rows[i] = std::move(acc);
  }

  detail::Mpz accz, mm;
  detail::mpz_set_u128(mm, m.value());
  std::vector<u128> out(n);
  for (size_t j = 0; j < n; ++j) {
    basis.centered(rows, j, accz);
    mpz_fdiv_r(accz, accz, mm);
    out[j] = detail::mpz_to_u128(accz);
  }
  return out;
}

std::array<std::vector<u128>, 3> tensor_scale_mod(
    std::span<const u128> a0, std::span<const u128> a1, std::span<const u128> b0,
    std::span<const u128> b1, const Modulus& q, u128 num, u128 den) {
  check_same_size(a0.size(), a1.size());
  check_same_size(b0.size(), b1.size());
  check_same_size(a0.size(), b0.size());
  const size_t n = a0.size();

  // Tensor coefficients are sums of two products of centered values, so
  // |v| ≤ n·(q/2)^2·2; the basis adds headroom for the sign trick.
  int bound_bits = bit_length(static_cast<u128>(n)) + 2 * q.bit_length() + 2;
  CrtBasis basis(n, bound_bits);
  const u128 q_half = q.half();

  std::vector<std::vector<uint64_t>> rows0(basis.count()), rows1(basis.count()),
      rows2(basis.count());
  std::vector<uint64_t> A0(n), A1(n), B0(n), B1(n);
  for (size_t i = 0; i < basis.count(); ++i) {
    const NttTable& t = *basis.tables[i];
    const PrimeField& f = t.field();
    ResidueReducer red(f);
    const uint64_t q_mod_p = red(q.value());
    auto centered_residue = [&](u128 v) {
      uint64_t r = red(v);
      return v > q_half ? f.sub(r, q_mod_p) : r;
    };
    for (size_t j = 0; j < n; ++j) A0[j] = centered_residue(a0[j]);
    for (size_t j = 0; j < n; ++j) A1[j] = centered_residue(a1[j]);
    for (size_t j = 0; j < n; ++j) B0[j] = centered_residue(b0[j]);
    for (size_t j = 0; j < n; ++j) B1[j] = centered_residue(b1[j]);
    t.forward(A0.data());
    t.forward(A1.data());
    t.forward(B0.data());
    t.forward(B1.data());
    rows0[i].resize(n);
    rows1[i].resize(n);
    rows2[i].resize(n);
    for (size_t j = 0; j < n; ++j) {
      rows0[i][j] = f.mul(A0[j], B0[j]);
      rows1[i][j] = f.add(f.mul(A0[j], B1[j]), f.mul(A1[j], B0[j]));
      rows2[i][j] = f.mul(A1[j], B1[j]);
    }
    t.inverse(rows0[i].data());
    t.inverse(rows1[i].data());
    t.inverse(rows2[i].data());
  }

  detail::Mpz acc, qz, numz, denz, den_half;
  detail::mpz_set_u128(qz, q.value());
  detail::mpz_set_u128(numz, num);
  detail::mpz_set_u128(denz, den);
  mpz_fdiv_q_ui(den_half, denz, 2);

  std::array<std::vector<u128>, 3> out;
  const std::vector<std::vector<uint64_t>>* parts[3] = {&rows0, &rows1, &rows2};
  for (int part = 0; part < 3; ++part) {
    out[part].resize(n);
    for (size_t j = 0; j < n; ++j) {
      basis.centered(*parts[part], j, acc);
      mpz_mul(acc, acc, numz);
      mpz_add(acc, acc, den_half);
      mpz_fdiv_q(acc, acc, denz);
      mpz_fdiv_r(acc, acc, qz);
      out[part][j] = detail::mpz_to_u128(acc);
    }
  }
  return out;
}

std::vector<u128> scale_round_mod(std::span<const u128> v, const Modulus& m_in, u128 num,
                                  u128 den, const Modulus& m_out) {
  detail::Mpz acc, numz, denz, den_half, outz;
  detail::mpz_set_u128(numz, num);
  detail::mpz_set_u128(denz, den);
  mpz_fdiv_q_ui(den_half, denz, 2);
  detail::mpz_set_u128(outz, m_out.value());

  std::vector<u128> out(v.size());
  for (size_t j = 0; j < v.size(); ++j) {
    detail::mpz_set_s128(acc, m_in.to_signed(v[j]));
    mpz_mul(acc, acc, numz);
    mpz_add(acc, acc, den_half);
    mpz_fdiv_q(acc, acc, denz);
    mpz_fdiv_r(acc, acc, outz);
    out[j] = detail::mpz_to_u128(acc);
  }
  return out;
}

}  // namespace hematch
