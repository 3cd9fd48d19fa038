// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hematch/ring.hpp"

namespace hematch {

/// Secret key s with binary coefficients, stored lifted mod q. key_id ties
/// ciphertexts and derived key material to the generating secret.
struct SecretKey {
  RingElement s;
  std::uint64_t key_id = 0;
};

/// (p0, p1) = (-(a·s + e), a) mod q.
struct PublicKey {
  RingElement p0;
  RingElement p1;
  std::uint64_t key_id = 0;
};

/// One decomposition level of switching material: (k0, k1) with
/// k0 + k1·s_target = w^i·hidden + noise.
struct KswPair {
  RingElement k0;
  RingElement k1;
};

/// Relinearization key: hides w^i·s^2 under s, one pair per digit level.
struct EvaluationKey {
  std::vector<KswPair> pairs;
  std::uint64_t key_id = 0;
};

/// Re-encryption key from source_key_id to target_key_id: hides w^i·s_source
/// under s_target.
struct KeySwitchKey {
  std::vector<KswPair> pairs;
  std::uint64_t source_key_id = 0;
  std::uint64_t target_key_id = 0;
};

/// Rotation keys, one per Galois automorphism exponent.
struct GaloisKeySet {
  std::map<std::uint64_t, KeySwitchKey> keys;  // exponent g -> switch material
  std::uint64_t key_id = 0;

  bool has_exponent(std::uint64_t g) const { return keys.count(g) != 0; }
};

}  // namespace hematch
