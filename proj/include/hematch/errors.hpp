// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hematch {

/// Objects built under different encryption parameters were mixed, or a
/// serialized blob's parameter digest does not match the expected one.
struct ParameterMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Ciphertexts under unrelated keys were combined without a switch key.
struct KeyMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A serialized blob is malformed: bad magic, version, tag, length, or an
/// out-of-range coefficient.
struct SerializationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A protocol frame or payload violates the wire contract.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A store record failed its checksum on read-back.
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hematch
