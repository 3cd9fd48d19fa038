// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/ring.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "hematch/errors.hpp"
#include "hematch/ntt.hpp"

namespace hematch {

namespace {

void check_compatible(const RingElement& a, const RingElement& b) {
  if (a.modulus() != b.modulus())
    throw ParameterMismatchError("ring op: modulus mismatch");
  if (a.degree_bound() != b.degree_bound())
    throw ParameterMismatchError("ring op: degree mismatch");
}

/// Inverse-CDF sampler for the truncated discrete Gaussian. One uniform
/// 64-bit draw per sample keeps it deterministic under a fixed seed.
class GaussianSampler {
 public:
  explicit GaussianSampler(const NoiseDistribution& dist) : bound_(dist.truncation_bound) {
    if (dist.sigma <= 0.0 || dist.truncation_bound < 0)
      throw std::invalid_argument("NoiseDistribution: sigma > 0 and bound >= 0 required");
    const int b = dist.truncation_bound;
    std::vector<long double> w(2 * b + 1);
    long double total = 0.0L;
    for (int k = -b; k <= b; ++k) {
      w[k + b] = std::exp(-static_cast<long double>(k) * k /
                          (2.0L * dist.sigma * dist.sigma));
      total += w[k + b];
    }
    thresholds_.resize(w.size());
    long double run = 0.0L;
    const long double scale = 18446744073709551615.0L;  // 2^64 - 1
    for (std::size_t i = 0; i < w.size(); ++i) {
      run += w[i];
      thresholds_[i] = static_cast<std::uint64_t>(run / total * scale);
    }
    thresholds_.back() = UINT64_MAX;
  }

  std::int32_t sample(SeedableRng& rng) const {
    std::uint64_t u = rng.next_u64();
    std::size_t lo = 0, hi = thresholds_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (thresholds_[mid] >= u)
        hi = mid;
      else
        lo = mid + 1;
    }
    return static_cast<std::int32_t>(lo) - bound_;
  }

 private:
  int bound_;
  std::vector<std::uint64_t> thresholds_;
};

}  // namespace

RingElement::RingElement(std::size_t n, const Modulus& m) : modulus_(m), coeffs_(n, 0) {
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("RingElement: length must be a power of two");
}

bool RingElement::is_zero() const {
  for (u128 c : coeffs_)
    if (c != 0) return false;
  return true;
}

u128 RingElement::linf_norm() const {
  u128 best = 0;
  for (u128 c : coeffs_) {
    s128 s = modulus_.to_signed(c);
    u128 mag = s < 0 ? static_cast<u128>(-s) : static_cast<u128>(s);
    if (mag > best) best = mag;
  }
  return best;
}

std::vector<s128> RingElement::to_signed() const {
  std::vector<s128> out(coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] = modulus_.to_signed(coeffs_[i]);
  return out;
}

RingElement ring_add(const RingElement& a, const RingElement& b) {
  check_compatible(a, b);
  RingElement out(a.degree_bound(), a.modulus());
  const u128 m = a.modulus().value();
  for (std::size_t i = 0; i < a.degree_bound(); ++i) out[i] = add_mod(a[i], b[i], m);
  return out;
}

RingElement ring_sub(const RingElement& a, const RingElement& b) {
  check_compatible(a, b);
  RingElement out(a.degree_bound(), a.modulus());
  const u128 m = a.modulus().value();
  for (std::size_t i = 0; i < a.degree_bound(); ++i) out[i] = sub_mod(a[i], b[i], m);
  return out;
}

RingElement ring_negate(const RingElement& a) {
  RingElement out(a.degree_bound(), a.modulus());
  const u128 m = a.modulus().value();
  for (std::size_t i = 0; i < a.degree_bound(); ++i) out[i] = a[i] == 0 ? 0 : m - a[i];
  return out;
}

RingElement ring_mul(const RingElement& a, const RingElement& b) {
  check_compatible(a, b);
  RingElement out(a.degree_bound(), a.modulus());
  out.coeffs() = negacyclic_mul_mod(a.coeffs(), b.coeffs(), a.modulus());
  return out;
}

RingElement ring_mul_schoolbook(const RingElement& a, const RingElement& b) {
  check_compatible(a, b);
  const std::size_t n = a.degree_bound();
  const u128 m = a.modulus().value();
  RingElement out(n, a.modulus());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      u128 prod = mul_mod(a[i], b[j], m);
      std::size_t k = i + j;
      if (k < n) {
        out[k] = add_mod(out[k], prod, m);
      } else {
        out[k - n] = sub_mod(out[k - n], prod, m);
      }
    }
  }
  return out;
}

RingElement ring_mul_scalar(const RingElement& a, u128 s) {
  RingElement out(a.degree_bound(), a.modulus());
  const u128 m = a.modulus().value();
  s %= m;
  for (std::size_t i = 0; i < a.degree_bound(); ++i) out[i] = mul_mod(a[i], s, m);
  return out;
}

RingElement apply_automorphism(const RingElement& a, std::uint64_t g) {
  const std::size_t n = a.degree_bound();
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  g %= two_n;
  if ((g & 1) == 0) throw std::invalid_argument("apply_automorphism: exponent must be odd");
  const u128 m = a.modulus().value();
  RingElement out(n, a.modulus());
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (e < n) {
      out[e] = a[i];
    } else {
      out[e - n] = a[i] == 0 ? 0 : m - a[i];
    }
    e += g;
    if (e >= two_n) e -= two_n;
  }
  return out;
}

RingElement sample_uniform(std::size_t n, const Modulus& m, SeedableRng& rng) {
  RingElement out(n, m);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform_below(m.value());
  return out;
}

RingElement sample_binary(std::size_t n, const Modulus& m, SeedableRng& rng) {
  RingElement out(n, m);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.next_u64() & 1;
  return out;
}

std::vector<std::int32_t> sample_noise_signed(std::size_t n, const NoiseDistribution& dist,
                                              SeedableRng& rng) {
  GaussianSampler sampler(dist);
  std::vector<std::int32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sampler.sample(rng);
  return out;
}

RingElement sample_noise(std::size_t n, const NoiseDistribution& dist, const Modulus& m,
                         SeedableRng& rng) {
  return from_signed(n, m, sample_noise_signed(n, dist, rng));
}

RingElement from_signed(std::size_t n, const Modulus& m, const std::vector<std::int32_t>& v) {
  if (v.size() != n) throw std::invalid_argument("from_signed: length mismatch");
  RingElement out(n, m);
  for (std::size_t i = 0; i < n; ++i) out[i] = m.from_signed(v[i]);
  return out;
}

std::size_t decompose_digit_count(const Modulus& m, std::uint64_t w) {
  if (w < 2) throw std::invalid_argument("base_decompose: base must be at least 2");
  std::size_t count = 1;
  u128 x = (m.value() - 1) / w;
  while (x > 0) {
    ++count;
    x /= w;
  }
  return count;
}

std::vector<RingElement> base_decompose(const RingElement& a, std::uint64_t w) {
  const std::size_t levels = decompose_digit_count(a.modulus(), w);
  const std::size_t n = a.degree_bound();
  std::vector<RingElement> digits(levels, RingElement(n, a.modulus()));
  const bool pow2 = (w & (w - 1)) == 0;
  const int shift = pow2 ? std::countr_zero(w) : 0;
  const u128 mask = pow2 ? (static_cast<u128>(w) - 1) : 0;
  for (std::size_t i = 0; i < n; ++i) {
    u128 v = a[i];
    for (std::size_t k = 0; k < levels; ++k) {
      if (pow2) {
        digits[k][i] = v & mask;
        v >>= shift;
      } else {
        digits[k][i] = v % w;
        v /= w;
      }
    }
  }
  return digits;
}

RingElement base_recompose(const std::vector<RingElement>& digits, std::uint64_t w) {
  if (digits.empty()) throw std::invalid_argument("base_recompose: no digits");
  const Modulus& m = digits[0].modulus();
  RingElement out(digits[0].degree_bound(), m);
  u128 wk = 1;
  for (const RingElement& d : digits) {
    for (std::size_t i = 0; i < out.degree_bound(); ++i)
      out[i] = add_mod(out[i], mul_mod(d[i], wk, m.value()), m.value());
    wk = mul_mod(wk, w, m.value());
  }
  return out;
}

}  // namespace hematch
