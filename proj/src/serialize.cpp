// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/serialize.hpp"

#include <cstring>

#include "hematch/errors.hpp"

namespace hematch {

namespace {

constexpr unsigned char kMagic[4] = {'H', 'E', 'F', 'M'};
constexpr std::uint8_t kVersion = 1;

thread_local const std::function<void(ObjectTag)>* g_parse_observer = nullptr;

void notify_parse(ObjectTag tag) {
  if (g_parse_observer) (*g_parse_observer)(tag);
}

void write_header(ByteWriter& w, ObjectTag tag, const EncryptionParams& params) {
  w.raw(ByteView(kMagic, 4));
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(tag));
  w.raw(ByteView(params.digest().data(), params.digest().size()));
  write_params_block(w, params);
}

/// Validates magic/version/tag and digest consistency; returns a reader
/// positioned at the body and the parameters parsed from the embedded block.
EncryptionParams read_header(ByteReader& r, ObjectTag want) {
  unsigned char magic[4];
  auto m = r.raw(4);
  std::memcpy(magic, m.data(), 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw SerializationError("object header: bad magic");
  if (r.u8() != kVersion) throw SerializationError("object header: unsupported format version");
  const std::uint8_t tag = r.u8();
  if (tag != static_cast<std::uint8_t>(want))
    throw SerializationError("object header: unexpected object tag");
  std::array<unsigned char, 32> digest;
  auto d = r.raw(32);
  std::memcpy(digest.data(), d.data(), 32);
  EncryptionParams params = read_params_block(r);
  if (params.digest() != digest)
    throw SerializationError("object header: digest does not match the parameter block");
  notify_parse(want);
  return params;
}

void check_expected(const EncryptionParams& got, const EncryptionParams& want,
                    const char* what) {
  if (got != want)
    throw SerializationError(std::string(what) +
                             ": object was built under different parameters");
}

void write_poly(ByteWriter& w, const RingElement& a, const Modulus& m) {
  const std::size_t width = m.byte_width();
  for (std::size_t i = 0; i < a.degree_bound(); ++i) w.uint(a[i], width);
}

RingElement read_poly(ByteReader& r, std::size_t n, const Modulus& m) {
  const std::size_t width = m.byte_width();
  RingElement a(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    u128 v = r.uint(width);
    if (v >= m.value()) throw SerializationError("coefficient out of range for its modulus");
    a[i] = v;
  }
  return a;
}

void finish_parse(const ByteReader& r, const char* what) {
  if (!r.done())
    throw SerializationError(std::string(what) + ": trailing bytes after the object body");
}

std::vector<KswPair> read_pairs(ByteReader& r, const EncryptionParams& params, const char* what) {
  const std::size_t count = r.u8();
  const std::size_t expect = decompose_digit_count(params.q(), params.w());
  if (count != expect)
    throw SerializationError(std::string(what) + ": switching pair count does not match w and q");
  std::vector<KswPair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RingElement k0 = read_poly(r, params.n(), params.q());
    RingElement k1 = read_poly(r, params.n(), params.q());
    pairs.push_back(KswPair{std::move(k0), std::move(k1)});
  }
  return pairs;
}

void write_pairs(ByteWriter& w, const std::vector<KswPair>& pairs,
                 const EncryptionParams& params) {
  w.u8(static_cast<std::uint8_t>(pairs.size()));
  for (const KswPair& p : pairs) {
    write_poly(w, p.k0, params.q());
    write_poly(w, p.k1, params.q());
  }
}

}  // namespace

ObjectTag peek_tag(ByteView blob) {
  if (blob.size() < 6) throw SerializationError("object header: truncated");
  if (std::memcmp(blob.data(), kMagic, 4) != 0)
    throw SerializationError("object header: bad magic");
  if (blob[4] != kVersion) throw SerializationError("object header: unsupported format version");
  const std::uint8_t tag = blob[5];
  if (tag < 0x01 || tag > 0x08) throw SerializationError("object header: unknown object tag");
  return static_cast<ObjectTag>(tag);
}

Bytes serialize_params(const EncryptionParams& params) {
  ByteWriter w;
  write_header(w, ObjectTag::params, params);
  return w.take();
}

EncryptionParams parse_params(ByteView blob) {
  ByteReader r(blob);
  EncryptionParams p = read_header(r, ObjectTag::params);
  finish_parse(r, "params");
  return p;
}

Bytes serialize_public_key(const PublicKey& pk, const EncryptionParams& params) {
  ByteWriter w;
  write_header(w, ObjectTag::public_key, params);
  w.u64(pk.key_id);
  write_poly(w, pk.p0, params.q());
  write_poly(w, pk.p1, params.q());
  return w.take();
}

PublicKey parse_public_key(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  check_expected(read_header(r, ObjectTag::public_key), params, "public key");
  PublicKey pk;
  pk.key_id = r.u64();
  pk.p0 = read_poly(r, params.n(), params.q());
  pk.p1 = read_poly(r, params.n(), params.q());
  finish_parse(r, "public key");
  return pk;
}

Bytes serialize_evaluation_key(const EvaluationKey& ek, const EncryptionParams& params) {
  ByteWriter w;
  write_header(w, ObjectTag::evaluation_key, params);
  w.u64(ek.key_id);
  write_pairs(w, ek.pairs, params);
  return w.take();
}

EvaluationKey parse_evaluation_key(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  check_expected(read_header(r, ObjectTag::evaluation_key), params, "evaluation key");
  EvaluationKey ek;
  ek.key_id = r.u64();
  ek.pairs = read_pairs(r, params, "evaluation key");
  finish_parse(r, "evaluation key");
  return ek;
}

Bytes serialize_galois_keys(const GaloisKeySet& gks, const EncryptionParams& params) {
  ByteWriter w;
  write_header(w, ObjectTag::galois_keys, params);
  w.u64(gks.key_id);
  w.u16(static_cast<std::uint16_t>(gks.keys.size()));
  for (const auto& [exponent, ksk] : gks.keys) {
    w.u64(exponent);
    write_pairs(w, ksk.pairs, params);
  }
  return w.take();
}

GaloisKeySet parse_galois_keys(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  check_expected(read_header(r, ObjectTag::galois_keys), params, "rotation keys");
  GaloisKeySet gks;
  gks.key_id = r.u64();
  const std::size_t count = r.u16();
  const u128 two_n = 2 * static_cast<u128>(params.n());
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t exponent = r.u64();
    if (exponent % 2 == 0 || exponent <= 1 || exponent >= two_n)
      throw SerializationError("rotation keys: invalid automorphism exponent");
    if (gks.keys.count(exponent))
      throw SerializationError("rotation keys: duplicate automorphism exponent");
    KeySwitchKey ksk;
    ksk.source_key_id = gks.key_id;
    ksk.target_key_id = gks.key_id;
    ksk.pairs = read_pairs(r, params, "rotation keys");
    gks.keys.emplace(exponent, std::move(ksk));
  }
  finish_parse(r, "rotation keys");
  return gks;
}

Bytes serialize_keyswitch_key(const KeySwitchKey& ksk, const EncryptionParams& params) {
  ByteWriter w;
  write_header(w, ObjectTag::keyswitch_key, params);
  w.u64(ksk.source_key_id);
  w.u64(ksk.target_key_id);
  write_pairs(w, ksk.pairs, params);
  return w.take();
}

KeySwitchKey parse_keyswitch_key(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  check_expected(read_header(r, ObjectTag::keyswitch_key), params, "switch key");
  KeySwitchKey ksk;
  ksk.source_key_id = r.u64();
  ksk.target_key_id = r.u64();
  ksk.pairs = read_pairs(r, params, "switch key");
  finish_parse(r, "switch key");
  return ksk;
}

Bytes serialize_ciphertext(const Ciphertext& ct, const EncryptionParams& params) {
  if (ct.params_digest != params.digest())
    throw SerializationError("ciphertext: object was built under different parameters");
  ByteWriter w;
  write_header(w, ObjectTag::ciphertext, params);
  w.u64(ct.key_id);
  w.u8(static_cast<std::uint8_t>(ct.parts.size()));
  for (const RingElement& part : ct.parts) write_poly(w, part, params.q());
  return w.take();
}

Ciphertext parse_ciphertext(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  check_expected(read_header(r, ObjectTag::ciphertext), params, "ciphertext");
  Ciphertext ct;
  ct.params_digest = params.digest();
  ct.key_id = r.u64();
  const std::size_t count = r.u8();
  if (count < 2 || count > 3)
    throw SerializationError("ciphertext: part count must be 2 or 3");
  for (std::size_t i = 0; i < count; ++i)
    ct.parts.push_back(read_poly(r, params.n(), params.q()));
  finish_parse(r, "ciphertext");
  return ct;
}

Bytes serialize_plaintext(const Plaintext& pt, const EncryptionParams& params) {
  if (pt.poly.modulus() != params.t() || pt.poly.degree_bound() != params.n())
    throw SerializationError("plaintext: object does not match the parameters");
  ByteWriter w;
  write_header(w, ObjectTag::plaintext, params);
  write_poly(w, pt.poly, params.t());
  return w.take();
}

Plaintext parse_plaintext(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  check_expected(read_header(r, ObjectTag::plaintext), params, "plaintext");
  Plaintext pt{read_poly(r, params.n(), params.t())};
  finish_parse(r, "plaintext");
  return pt;
}

Bytes export_secret_key(const SecretKey& sk, const EncryptionParams& params) {
  ByteWriter w;
  write_header(w, ObjectTag::secret_key, params);
  w.u64(sk.key_id);
  write_poly(w, sk.s, params.q());
  return w.take();
}

SecretKey import_secret_key(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  check_expected(read_header(r, ObjectTag::secret_key), params, "secret key");
  SecretKey sk;
  sk.key_id = r.u64();
  sk.s = read_poly(r, params.n(), params.q());
  finish_parse(r, "secret key");
  return sk;
}

ParseObserverGuard::ParseObserverGuard(std::function<void(ObjectTag)> fn)
    : fn_(std::move(fn)), prev_(g_parse_observer) {
  g_parse_observer = &fn_;
}

ParseObserverGuard::~ParseObserverGuard() { g_parse_observer = prev_; }

}  // namespace hematch
