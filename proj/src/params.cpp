// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/params.hpp"

#include <numeric>
#include <stdexcept>

#include "hematch/rng.hpp"

namespace hematch {

namespace {

int infer_security_level(int q_bits) {
  if (q_bits == 110) return 128;
  if (q_bits == 77) return 192;
  return 0;
}

}  // namespace

EncryptionParams::EncryptionParams(std::size_t n, int q_bits,
                                   std::vector<std::uint64_t> plain_moduli, std::uint64_t w,
                                   NoiseDistribution noise, int security_level)
    : n_(n),
      q_(largest_prime_below(q_bits, 2 * static_cast<u128>(n))),
      plain_moduli_(std::move(plain_moduli)),
      w_(w),
      noise_(noise),
      security_level_(security_level ? security_level : infer_security_level(q_bits)) {
  finish();
}

EncryptionParams::EncryptionParams(std::size_t n, u128 q,
                                   std::vector<std::uint64_t> plain_moduli, std::uint64_t w,
                                   NoiseDistribution noise, int security_level)
    : n_(n),
      q_(q),
      plain_moduli_(std::move(plain_moduli)),
      w_(w),
      noise_(noise),
      security_level_(security_level) {
  finish();
}

void EncryptionParams::finish() {
  if (n_ < 2 || (n_ & (n_ - 1)) != 0)
    throw std::invalid_argument("EncryptionParams: n must be a power of two, n >= 2");
  const u128 two_n = 2 * static_cast<u128>(n_);
  if (!is_prime(q_.value()) || q_.value() % two_n != 1)
    throw std::invalid_argument("EncryptionParams: q must be prime and ≡ 1 (mod 2n)");
  if (plain_moduli_.empty() || plain_moduli_.size() > 255)
    throw std::invalid_argument("EncryptionParams: need 1..255 plaintext moduli");
  if (w_ < 2) throw std::invalid_argument("EncryptionParams: decomposition base must be >= 2");

  u128 prod = 1;
  for (std::size_t i = 0; i < plain_moduli_.size(); ++i) {
    std::uint64_t ti = plain_moduli_[i];
    if (ti < 2) throw std::invalid_argument("EncryptionParams: plaintext modulus must be >= 2");
    for (std::size_t j = 0; j < i; ++j)
      if (std::gcd(plain_moduli_[j], ti) != 1)
        throw std::invalid_argument("EncryptionParams: plaintext moduli must be coprime");
    if (prod > u128_max() / ti)
      throw std::invalid_argument("EncryptionParams: plaintext modulus product overflows");
    prod *= ti;
  }
  t_ = Modulus(prod);
  if (q_.bit_length() < t_.bit_length() + 20)
    throw std::invalid_argument(
        "EncryptionParams: q must exceed the plaintext modulus by at least 20 bits");
  delta_ = q_.value() / prod;

  batching_ = true;
  for (std::uint64_t ti : plain_moduli_) {
    if (!is_prime(ti) || ti % two_n != 1) {
      batching_ = false;
      break;
    }
  }

  ByteWriter bw;
  write_params_block(bw, *this);
  digest_ = sha256(bw.bytes());
}

Modulus EncryptionParams::residue_modulus(std::size_t idx) const {
  if (idx >= plain_moduli_.size())
    throw std::invalid_argument("EncryptionParams: plaintext residue index out of range");
  return Modulus(plain_moduli_[idx]);
}

u128 EncryptionParams::delta_residue(std::size_t idx) const {
  if (idx >= plain_moduli_.size())
    throw std::invalid_argument("EncryptionParams: plaintext residue index out of range");
  return q_.value() / plain_moduli_[idx];
}

void write_params_block(ByteWriter& w, const EncryptionParams& p) {
  w.u32(static_cast<std::uint32_t>(p.n()));
  const std::size_t q_width = p.q().byte_width();
  w.u16(static_cast<std::uint16_t>(q_width));
  w.uint(p.q().value(), q_width);
  w.u8(static_cast<std::uint8_t>(p.plain_moduli().size()));
  for (std::uint64_t ti : p.plain_moduli()) w.u64(ti);
  w.u64(p.w());
}

EncryptionParams read_params_block(ByteReader& r) {
  std::uint32_t n = r.u32();
  if (n == 0 || n > (1u << 24)) throw SerializationError("params block: bad ring degree");
  std::size_t q_width = r.u16();
  u128 q = r.uint(q_width);
  std::uint8_t count = r.u8();
  if (count == 0) throw SerializationError("params block: no plaintext moduli");
  std::vector<std::uint64_t> moduli(count);
  for (auto& m : moduli) m = r.u64();
  std::uint64_t w = r.u64();
  try {
    return EncryptionParams(n, q, std::move(moduli), w);
  } catch (const std::invalid_argument& e) {
    throw SerializationError(std::string("params block: ") + e.what());
  }
}

std::vector<std::string> preset_names() {
  return {"l128_n128",    "l128_n256",    "l128_n1024",    "l128_n2048",    "l128_n4096",
          "l192_n128",    "l192_n256",    "l192_n1024",    "l192_n2048",    "l192_n4096",
          "l128_n128_t2", "l128_n256_t2", "l128_n1024_t2", "l128_n2048_t2", "l128_n4096_t2"};
}

EncryptionParams preset_params(const std::string& name) {
  auto build = [](int level, std::size_t n, bool two_t) {
    const int q_bits = level == 128 ? 110 : 77;
    const std::uint64_t w = level == 128 ? (1ULL << 32) : (1ULL << 16);
    std::vector<std::uint64_t> t{40961};
    if (two_t) t.push_back(65537);
    return EncryptionParams(n, q_bits, std::move(t), w, NoiseDistribution{}, level);
  };
  for (int level : {128, 192}) {
    for (std::size_t n : {128, 256, 1024, 2048, 4096}) {
      std::string base = "l" + std::to_string(level) + "_n" + std::to_string(n);
      if (name == base) return build(level, n, false);
      if (level == 128 && name == base + "_t2") return build(level, n, true);
    }
  }
  throw std::invalid_argument("unknown parameter preset: " + name);
}

EncryptionParams preset_for_dimension(std::size_t d, int security_level, bool two_t) {
  for (std::size_t n : {128, 256, 1024, 2048, 4096}) {
    if (n / 2 >= d) {
      std::string name = "l" + std::to_string(security_level) + "_n" + std::to_string(n);
      if (two_t) name += "_t2";
      return preset_params(name);
    }
  }
  throw std::invalid_argument("no shipped preset holds dimension " + std::to_string(d));
}

}  // namespace hematch
