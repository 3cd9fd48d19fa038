// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/slot_codec.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "hematch/ntt.hpp"

namespace hematch {

namespace {

/// Slot transform over one plaintext factor: the negacyclic NTT plus the
/// permutation between slot positions and transform output indices.
struct SlotTable {
  NttTable ntt;
  std::vector<std::size_t> slot_to_idx;

  SlotTable(std::uint64_t p, std::size_t n) : ntt(p, n), slot_to_idx(n) {
    const PrimeField& f = ntt.field();
    // The transform of the monomial x lists the evaluation points themselves,
    // one per output index — calibrating the permutation without relying on
    // the transform's internal output order.
    std::vector<std::uint64_t> fx(n, 0);
    fx[1] = 1;
    ntt.forward(fx.data());
    std::unordered_map<std::uint64_t, std::size_t> point_idx;
    point_idx.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) point_idx.emplace(fx[k], k);
    // Slot s of row 0 reads the evaluation at ψ^(3^s), row 1 at ψ^(-3^s);
    // the automorphism x -> x^3 then rotates rows, x -> x^(2n-1) swaps them.
    const u128 two_n = 2 * static_cast<u128>(n);
    const std::size_t row = n / 2;
    std::uint64_t g = 1;
    for (std::size_t s = 0; s < row; ++s) {
      slot_to_idx[s] = point_idx.at(f.pow(ntt.psi(), g));
      slot_to_idx[row + s] =
          point_idx.at(f.pow(ntt.psi(), static_cast<std::uint64_t>(two_n - g)));
      g = static_cast<std::uint64_t>((static_cast<u128>(g) * 3) % two_n);
    }
  }
};

const SlotTable& slot_table(std::uint64_t p, std::size_t n) {
  static std::mutex m;
  static std::map<std::pair<std::uint64_t, std::size_t>, SlotTable> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find({p, n});
  if (it == cache.end()) it = cache.try_emplace({p, n}, p, n).first;
  return it->second;
}

void check_batching(const EncryptionParams& params, const char* where) {
  if (!params.batching())
    throw std::domain_error(std::string(where) +
                            ": parameters do not support slot batching "
                            "(every plaintext factor must be prime and ≡ 1 mod 2n)");
}

std::uint64_t reduce_signed(std::int64_t v, std::uint64_t p) {
  std::int64_t r = v % static_cast<std::int64_t>(p);
  return r >= 0 ? static_cast<std::uint64_t>(r) : static_cast<std::uint64_t>(r) + p;
}

}  // namespace

QuantizedTemplate quantize(std::span<const double> v, double delta) {
  if (!(delta > 0.0)) throw std::domain_error("quantize: step must be positive");
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-6)
    throw std::domain_error("quantize: input must be unit-normalized");
  QuantizedTemplate q;
  q.delta = delta;
  q.dim = v.size();
  q.values.reserve(v.size());
  for (double x : v) q.values.push_back(std::llround(x / delta));
  return q;
}

double dequantize_score(std::int64_t score, double delta) {
  return 1.0 - delta * delta * static_cast<double>(score);
}

void check_score_range(double delta, const EncryptionParams& params) {
  if (!(delta > 0.0)) throw std::domain_error("check_score_range: step must be positive");
  const double peak = std::ceil(1.0 / delta) + 1.0;
  const double needed = 2.0 * peak * peak * 1.05;
  if (!(static_cast<double>(params.t().value()) > needed))
    throw std::domain_error(
        "quantization step too fine for the plaintext modulus: the worst-case "
        "integer score could wrap; use a coarser step or a larger modulus");
}

Plaintext encode_slots_residue(std::span<const std::int64_t> values,
                               const EncryptionParams& params, std::size_t residue) {
  check_batching(params, "encode_slots");
  if (values.size() > params.slot_count())
    throw std::length_error("encode_slots: more values than slots");
  const Modulus t_i = params.residue_modulus(residue);
  const std::uint64_t p = static_cast<std::uint64_t>(t_i.value());
  const SlotTable& tab = slot_table(p, params.n());
  std::vector<std::uint64_t> evals(params.n(), 0);
  for (std::size_t s = 0; s < values.size(); ++s)
    evals[tab.slot_to_idx[s]] = reduce_signed(values[s], p);
  tab.ntt.inverse(evals.data());
  Plaintext pt{RingElement(params.n(), t_i)};
  for (std::size_t i = 0; i < params.n(); ++i) pt.poly[i] = evals[i];
  return pt;
}

std::vector<std::uint64_t> decode_slots_residue(const Plaintext& pt,
                                                const EncryptionParams& params,
                                                std::size_t residue) {
  check_batching(params, "decode_slots");
  const Modulus t_i = params.residue_modulus(residue);
  if (pt.poly.modulus() != t_i || pt.poly.degree_bound() != params.n())
    throw ParameterMismatchError("decode_slots: plaintext does not match the residue modulus");
  const std::uint64_t p = static_cast<std::uint64_t>(t_i.value());
  const SlotTable& tab = slot_table(p, params.n());
  std::vector<std::uint64_t> evals(params.n());
  for (std::size_t i = 0; i < params.n(); ++i)
    evals[i] = static_cast<std::uint64_t>(pt.poly[i]);
  tab.ntt.forward(evals.data());
  std::vector<std::uint64_t> slots(params.n());
  for (std::size_t s = 0; s < params.n(); ++s) slots[s] = evals[tab.slot_to_idx[s]];
  return slots;
}

std::int64_t crt_combine_signed(std::span<const std::uint64_t> residues,
                                const EncryptionParams& params) {
  const auto& moduli = params.plain_moduli();
  if (residues.size() != moduli.size())
    throw std::invalid_argument("crt_combine_signed: one residue per plaintext factor required");
  // Incremental (Garner) combination; the running value stays below the
  // running modulus product, which params caps below 2^127.
  u128 x = residues[0] % moduli[0];
  u128 prod = moduli[0];
  for (std::size_t i = 1; i < moduli.size(); ++i) {
    const std::uint64_t ti = moduli[i];
    const std::uint64_t xi = static_cast<std::uint64_t>(x % ti);
    const std::uint64_t ri = residues[i] % ti;
    const std::uint64_t diff = ri >= xi ? ri - xi : ri + ti - xi;
    const std::uint64_t prod_inv = static_cast<std::uint64_t>(
        pow_mod(prod % ti, ti - 2, ti));  // ti prime under batching
    const std::uint64_t step = static_cast<std::uint64_t>(
        (static_cast<u128>(diff) * prod_inv) % ti);
    x += prod * step;
    prod *= ti;
  }
  // Symmetric range [-t/2, t/2): x >= ceil(t/2) wraps to x - t (the even
  // boundary t/2 itself maps to -t/2).
  const u128 t = params.t().value();
  if (x >= (t + 1) / 2) {
    const u128 mag = t - x;
    if (mag > static_cast<u128>(INT64_MAX)) throw std::overflow_error("slot value exceeds int64");
    return -static_cast<std::int64_t>(mag);
  }
  if (x > static_cast<u128>(INT64_MAX)) throw std::overflow_error("slot value exceeds int64");
  return static_cast<std::int64_t>(x);
}

Plaintext encode_slots(std::span<const std::int64_t> values, const EncryptionParams& params) {
  check_batching(params, "encode_slots");
  if (values.size() > params.slot_count())
    throw std::length_error("encode_slots: more values than slots");
  const std::size_t n = params.n();
  const std::size_t k = params.residue_count();
  if (k == 1) {
    Plaintext one = encode_slots_residue(values, params, 0);
    Plaintext pt = make_plaintext(params);
    for (std::size_t i = 0; i < n; ++i) pt.poly[i] = one.poly[i];
    return pt;
  }
  std::vector<Plaintext> per(k, Plaintext{RingElement(1, Modulus(2))});
  for (std::size_t r = 0; r < k; ++r) per[r] = encode_slots_residue(values, params, r);
  Plaintext pt = make_plaintext(params);
  std::vector<std::uint64_t> residues(k);
  for (std::size_t i = 0; i < n; ++i) {
    // Combine coefficient residues; coefficients are unconstrained mod t, so
    // use the full-range (unsigned) combination rather than the signed one.
    u128 x = static_cast<std::uint64_t>(per[0].poly[i]);
    u128 prod = params.plain_moduli()[0];
    for (std::size_t r = 1; r < k; ++r) {
      const std::uint64_t ti = params.plain_moduli()[r];
      const std::uint64_t xi = static_cast<std::uint64_t>(x % ti);
      const std::uint64_t ri = static_cast<std::uint64_t>(per[r].poly[i]);
      const std::uint64_t diff = ri >= xi ? ri - xi : ri + ti - xi;
      const std::uint64_t prod_inv =
          static_cast<std::uint64_t>(pow_mod(prod % ti, ti - 2, ti));
      const std::uint64_t step =
          static_cast<std::uint64_t>((static_cast<u128>(diff) * prod_inv) % ti);
      x += prod * step;
      prod *= ti;
    }
    pt.poly[i] = x;
  }
  return pt;
}

std::vector<std::int64_t> decode_slots(const Plaintext& pt, const EncryptionParams& params) {
  check_batching(params, "decode_slots");
  if (pt.poly.modulus() != params.t() || pt.poly.degree_bound() != params.n())
    throw ParameterMismatchError("decode_slots: plaintext does not match parameters");
  const std::size_t n = params.n();
  const std::size_t k = params.residue_count();
  std::vector<std::vector<std::uint64_t>> per_slot(k);
  for (std::size_t r = 0; r < k; ++r) {
    const Modulus t_i = params.residue_modulus(r);
    Plaintext res{RingElement(n, t_i)};
    for (std::size_t i = 0; i < n; ++i) res.poly[i] = pt.poly[i] % t_i.value();
    per_slot[r] = decode_slots_residue(res, params, r);
  }
  std::vector<std::int64_t> out(n);
  std::vector<std::uint64_t> residues(k);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t r = 0; r < k; ++r) residues[r] = per_slot[r][s];
    out[s] = crt_combine_signed(residues, params);
  }
  return out;
}

Plaintext encode_scalar(std::int64_t a, std::uint64_t w, std::size_t n, const Modulus& t) {
  if (w < 2) throw std::invalid_argument("encode_scalar: base must be >= 2");
  if (static_cast<u128>(w) > t.value())
    throw std::invalid_argument("encode_scalar: base exceeds the plaintext modulus");
  Plaintext pt{RingElement(n, t)};
  const bool neg = a < 0;
  std::uint64_t mag = neg ? 0ULL - static_cast<std::uint64_t>(a) : static_cast<std::uint64_t>(a);
  std::size_t i = 0;
  while (mag != 0) {
    if (i == n) throw std::overflow_error("encode_scalar: integer exceeds w^n - 1");
    const std::uint64_t d = mag % w;
    mag /= w;
    pt.poly[i++] = neg ? (d == 0 ? 0 : t.value() - d) : d;
  }
  return pt;
}

std::int64_t decode_scalar(const Plaintext& pt, std::uint64_t w) {
  if (w < 2) throw std::invalid_argument("decode_scalar: base must be >= 2");
  const Modulus& t = pt.poly.modulus();
  // Horner evaluation at x = w over checked 128-bit arithmetic.
  const s128 limit = static_cast<s128>(1) << 126;
  s128 acc = 0;
  for (std::size_t i = pt.poly.degree_bound(); i-- > 0;) {
    if (acc > limit / static_cast<s128>(w) || acc < -(limit / static_cast<s128>(w)))
      throw std::overflow_error("decode_scalar: value exceeds the representable range");
    acc *= static_cast<s128>(w);
    acc += t.to_signed(pt.poly[i]);
  }
  if (acc > static_cast<s128>(INT64_MAX) || acc < static_cast<s128>(INT64_MIN))
    throw std::overflow_error("decode_scalar: value exceeds int64");
  return static_cast<std::int64_t>(acc);
}

std::uint64_t digit_l1(std::int64_t a, std::uint64_t w) {
  if (w < 2) throw std::invalid_argument("digit_l1: base must be >= 2");
  std::uint64_t mag = a < 0 ? 0ULL - static_cast<std::uint64_t>(a) : static_cast<std::uint64_t>(a);
  std::uint64_t sum = 0;
  while (mag != 0) {
    sum += mag % w;
    mag /= w;
  }
  return sum;
}

}  // namespace hematch
