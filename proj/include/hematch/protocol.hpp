// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hematch/errors.hpp"
#include "hematch/matcher.hpp"
#include "hematch/net.hpp"
#include "hematch/serialize.hpp"
#include "hematch/store.hpp"

namespace hematch {

// ---------------------------------------------------------------------------
// Framing
// ---------------------------------------------------------------------------

/// Hard cap on a whole frame (length field included).
inline constexpr std::size_t kMaxFrameBytes = 64ull << 20;

/// Wire format: [u32 little-endian length][u8 type][payload], where length
/// counts the type byte plus the payload.
enum class MessageType : std::uint8_t {
  enroll = 0x01,
  enroll_ack = 0x02,
  auth_request = 0x03,
  score_response = 0x04,
  error = 0x05,
};

enum class ProtocolErrorCode : std::uint16_t {
  duplicate = 1,
  params = 2,
  unknown_identity = 3,
  no_switch_key = 4,
  malformed = 5,
  internal = 6,
};

struct Frame {
  MessageType type;
  Bytes payload;
};

void write_frame(ByteChannel& ch, MessageType type, ByteView payload);

/// Blocks for one frame. Returns nullopt on orderly EOF at a frame boundary;
/// throws ProtocolError on truncation, oversized length, or an unknown type
/// byte.
std::optional<Frame> read_frame(ByteChannel& ch);

/// The server answered with an ERROR frame; code and message are the
/// server's.
struct RemoteError : ProtocolError {
  RemoteError(ProtocolErrorCode c, const std::string& message)
      : ProtocolError(message), code(c) {}
  ProtocolErrorCode code;
};

// ---------------------------------------------------------------------------
// Public key bundle
// ---------------------------------------------------------------------------

/// Everything the server may hold for a key: encryption, relinearization,
/// and rotation keys. Never the secret key.
struct PublicBundle {
  PublicKey pk;
  EvaluationKey ek;
  GaloisKeySet gks;
};

Bytes serialize_public_bundle(const PublicBundle& bundle, const EncryptionParams& params);
PublicBundle parse_public_bundle(ByteView blob, const EncryptionParams& params);

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

struct ClientKeys {
  SecretKey sk;
  PublicBundle pub;
};

/// Secret, public, relinearization, and rotation keys for one client, with
/// the rotation steps sum_slots consumes.
ClientKeys generate_client_keys(const EncryptionParams& params, SeedableRng& rng);

enum class ScoreAggregation : std::uint8_t { minimum = 1, mean = 2 };

struct MatchOptions {
  TemplateForm form = TemplateForm::batched;
  double delta = 0.01;
  std::uint64_t scalar_base = kDefaultScalarBase;
  /// How multiple per-template dissimilarities become one decision value.
  ScoreAggregation aggregation = ScoreAggregation::minimum;
  /// Attach the probe's public bundle to AUTH_REQUEST (only useful when the
  /// probe key differs from the enrolled key and the server has not seen it).
  bool send_probe_key = false;
};

/// The client side of the two-party protocol. Owns the secret key; the
/// server only ever sees serialized public material and ciphertexts.
class Client {
 public:
  Client(EncryptionParams params, ClientKeys keys);

  /// Normalize, quantize, encrypt, and enroll the feature vectors under
  /// `identity`. `switch_keys` provisions cross-key authentication (probe
  /// key -> this key, and the reverse for the score switch-back). Throws
  /// RemoteError on server rejection.
  void enroll(ByteChannel& ch, const std::string& identity,
              const std::vector<std::vector<double>>& features, const MatchOptions& options,
              SeedableRng& rng, std::span<const KeySwitchKey> switch_keys = {});

  struct VerifyResult {
    bool accept = false;
    /// Aggregated dissimilarity (per options.aggregation), unclamped.
    double aggregate = 0.0;
    /// One dissimilarity per enrolled template, server order.
    std::vector<double> dissimilarities;
    std::vector<std::int64_t> raw_integers;
  };

  /// Authenticate `feature` against the claimed identity. The decision
  /// clamps the aggregate into the cosine-dissimilarity range [0, 2] before
  /// comparing (accept iff clamped <= threshold), so threshold 2 always
  /// accepts and negative thresholds always reject even at the quantization
  /// error margins.
  VerifyResult verify(ByteChannel& ch, const std::string& identity,
                      std::span<const double> feature, double threshold,
                      const MatchOptions& options, SeedableRng& rng);

  const ClientKeys& keys() const { return keys_; }

 private:
  EncryptionParams params_;
  ClientKeys keys_;
};

// ---------------------------------------------------------------------------
// Server
// ---------------------------------------------------------------------------

/// The server side: stores enrollments, scores probes homomorphically, and
/// never holds secret keys or plaintexts. Shared across sessions; the store
/// serializes writes internally.
class Server {
 public:
  Server(TemplateStore& store, const EncryptionParams& params);

  /// Handles exactly one request frame and writes exactly one response
  /// frame (one session). Malformed or rejected requests get an ERROR frame;
  /// transport failures propagate. Returns false when the peer closed
  /// before sending a request.
  bool serve_session(ByteChannel& ch);

  /// Test tap: called with the tag of every serialized object the session
  /// deserializes, on the session's thread. Install before serving.
  void set_parse_tap(std::function<void(ObjectTag)> tap) { tap_ = std::move(tap); }

 private:
  void handle_enroll(ByteChannel& ch, ByteView payload);
  void handle_auth(ByteChannel& ch, ByteView payload);

  TemplateStore& store_;
  EncryptionParams params_;
  std::function<void(ObjectTag)> tap_;
};

/// Accept loop: one thread per connection, one request per connection.
/// Returns when the listener is closed from another thread.
void run_tcp_server(TcpListener& listener, Server& server);

}  // namespace hematch
