// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hematch/fv.hpp"
#include "hematch/params.hpp"

namespace hematch {

/// Binary object format: magic "HEFM", format version u8, object tag u8,
/// params digest (32 bytes), the full parameter block, then the tag-specific
/// body. Coefficient arrays pack little-endian at the fixed width of their
/// modulus. Every parse validates magic, version, tag, digest, counts, and
/// coefficient ranges, and must consume the buffer exactly; violations throw
/// SerializationError. Secret keys intentionally have no generic serializer —
/// only the explicit export/import pair handles them.
enum class ObjectTag : std::uint8_t {
  params = 0x01,
  public_key = 0x02,
  secret_key = 0x03,
  evaluation_key = 0x04,
  galois_keys = 0x05,
  ciphertext = 0x06,
  plaintext = 0x07,
  keyswitch_key = 0x08,
};

using Bytes = std::vector<unsigned char>;
using ByteView = std::span<const unsigned char>;

/// Validates the header and returns the object tag (cheap; reads no body).
ObjectTag peek_tag(ByteView blob);

Bytes serialize_params(const EncryptionParams& params);
EncryptionParams parse_params(ByteView blob);

Bytes serialize_public_key(const PublicKey& pk, const EncryptionParams& params);
PublicKey parse_public_key(ByteView blob, const EncryptionParams& params);

Bytes serialize_evaluation_key(const EvaluationKey& ek, const EncryptionParams& params);
EvaluationKey parse_evaluation_key(ByteView blob, const EncryptionParams& params);

Bytes serialize_galois_keys(const GaloisKeySet& gks, const EncryptionParams& params);
GaloisKeySet parse_galois_keys(ByteView blob, const EncryptionParams& params);

Bytes serialize_keyswitch_key(const KeySwitchKey& ksk, const EncryptionParams& params);
KeySwitchKey parse_keyswitch_key(ByteView blob, const EncryptionParams& params);

Bytes serialize_ciphertext(const Ciphertext& ct, const EncryptionParams& params);
Ciphertext parse_ciphertext(ByteView blob, const EncryptionParams& params);

Bytes serialize_plaintext(const Plaintext& pt, const EncryptionParams& params);
Plaintext parse_plaintext(ByteView blob, const EncryptionParams& params);

/// The only way secret-key material crosses a serialization boundary.
Bytes export_secret_key(const SecretKey& sk, const EncryptionParams& params);
SecretKey import_secret_key(ByteView blob, const EncryptionParams& params);

/// Scoped, thread-local tap on deserialization: while a guard is alive, every
/// successfully validated object header parsed on this thread reports its tag
/// to the callback. The server installs one per session so tests can assert
/// which object kinds ever cross its trust boundary (a secret key or
/// plaintext showing up server-side is a protocol violation).
class ParseObserverGuard {
 public:
  explicit ParseObserverGuard(std::function<void(ObjectTag)> fn);
  ~ParseObserverGuard();
  ParseObserverGuard(const ParseObserverGuard&) = delete;
  ParseObserverGuard& operator=(const ParseObserverGuard&) = delete;

 private:
  std::function<void(ObjectTag)> fn_;
  const std::function<void(ObjectTag)>* prev_;
};

}  // namespace hematch
