// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/protocol.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hematch/bytes.hpp"

namespace hematch {
namespace {

/// Reads exactly len bytes. Returns false on EOF before the first byte;
/// throws ProtocolError on EOF mid-read.
bool read_full(ByteChannel& ch, unsigned char* buf, std::size_t len) {
  std::size_t got = 0;
  while (got < len) {
    std::size_t n = ch.recv(buf + got, len - got);
    if (n == 0) {
      if (got == 0) return false;
      throw ProtocolError("connection closed inside a frame");
    }
    got += n;
  }
  return true;
}

/// Server-side rejection that becomes an ERROR frame.
struct Reject {
  ProtocolErrorCode code;
  std::string message;
};

[[noreturn]] void reject(ProtocolErrorCode code, const std::string& message) {
  throw Reject{code, message};
}

void send_error(ByteChannel& ch, ProtocolErrorCode code, const std::string& message) {
  ByteWriter w;
  w.u16(static_cast<std::uint16_t>(code));
  w.raw(ByteView(reinterpret_cast<const unsigned char*>(message.data()), message.size()));
  write_frame(ch, MessageType::error, w.bytes());
}

[[noreturn]] void throw_remote_error(ByteView payload) {
  ByteReader r(payload);
  std::uint16_t code = r.u16();
  auto rest = r.raw(r.remaining());
  std::string message(reinterpret_cast<const char*>(rest.data()), rest.size());
  throw RemoteError(static_cast<ProtocolErrorCode>(code), "server: " + message);
}

/// Sends a request and returns the expected response type's payload;
/// translates ERROR frames into RemoteError.
Bytes round_trip(ByteChannel& ch, MessageType request, ByteView payload, MessageType want) {
  write_frame(ch, request, payload);
  auto frame = read_frame(ch);
  if (!frame) throw ProtocolError("connection closed before a response arrived");
  if (frame->type == MessageType::error) throw_remote_error(frame->payload);
  if (frame->type != want) throw ProtocolError("unexpected response type");
  return std::move(frame->payload);
}

EncryptedTemplate make_template(std::span<const double> feature, const MatchOptions& options,
                                const PublicKey& pk, const EncryptionParams& params,
                                SeedableRng& rng) {
  auto unit = normalize(feature);
  auto q = quantize(unit, options.delta);
  return encrypt_template(q, options.form, pk, params, rng, options.scalar_base);
}

}  // namespace

// ---------------------------------------------------------------------------
// Framing
// ---------------------------------------------------------------------------

void write_frame(ByteChannel& ch, MessageType type, ByteView payload) {
  if (4 + 1 + payload.size() > kMaxFrameBytes) throw ProtocolError("frame too large to send");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(1 + payload.size()));
  w.u8(static_cast<std::uint8_t>(type));
  w.raw(payload);
  ch.send(w.bytes());
}

std::optional<Frame> read_frame(ByteChannel& ch) {
  unsigned char lenbuf[4];
  if (!read_full(ch, lenbuf, 4)) return std::nullopt;
  std::uint32_t len = static_cast<std::uint32_t>(lenbuf[0]) |
                      (static_cast<std::uint32_t>(lenbuf[1]) << 8) |
                      (static_cast<std::uint32_t>(lenbuf[2]) << 16) |
                      (static_cast<std::uint32_t>(lenbuf[3]) << 24);
  if (len == 0) throw ProtocolError("frame with no type byte");
  if (4 + static_cast<std::size_t>(len) > kMaxFrameBytes)
    throw ProtocolError("frame exceeds the size cap");
  Frame f;
  unsigned char type;
  if (!read_full(ch, &type, 1)) throw ProtocolError("connection closed inside a frame");
  if (type < 0x01 || type > 0x05) throw ProtocolError("unknown frame type");
  f.type = static_cast<MessageType>(type);
  f.payload.resize(len - 1);
  if (len > 1 && !read_full(ch, f.payload.data(), f.payload.size()))
    throw ProtocolError("connection closed inside a frame");
  return f;
}

// ---------------------------------------------------------------------------
// Public key bundle
// ---------------------------------------------------------------------------

Bytes serialize_public_bundle(const PublicBundle& bundle, const EncryptionParams& params) {
  ByteWriter w;
  w.blob32(serialize_public_key(bundle.pk, params));
  w.blob32(serialize_evaluation_key(bundle.ek, params));
  w.blob32(serialize_galois_keys(bundle.gks, params));
  return w.take();
}

PublicBundle parse_public_bundle(ByteView blob, const EncryptionParams& params) {
  ByteReader r(blob);
  PublicBundle b;
  b.pk = parse_public_key(r.blob32(), params);
  b.ek = parse_evaluation_key(r.blob32(), params);
  b.gks = parse_galois_keys(r.blob32(), params);
  if (!r.done()) throw SerializationError("trailing bytes after public bundle");
  if (b.ek.key_id != b.pk.key_id || b.gks.key_id != b.pk.key_id)
    throw SerializationError("public bundle mixes keys");
  return b;
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

ClientKeys generate_client_keys(const EncryptionParams& params, SeedableRng& rng) {
  ClientKeys keys;
  keys.sk = gen_secret_key(params, rng);
  keys.pub.pk = gen_public_key(keys.sk, params, rng);
  keys.pub.ek = gen_evaluation_key(keys.sk, params, rng);
  keys.pub.gks = gen_galois_keys(keys.sk, params, sum_slots_steps(params), true, rng);
  return keys;
}

Client::Client(EncryptionParams params, ClientKeys keys)
    : params_(std::move(params)), keys_(std::move(keys)) {}

void Client::enroll(ByteChannel& ch, const std::string& identity,
                    const std::vector<std::vector<double>>& features,
                    const MatchOptions& options, SeedableRng& rng,
                    std::span<const KeySwitchKey> switch_keys) {
  if (identity.empty()) throw std::invalid_argument("enroll: empty identity");
  if (features.empty()) throw std::invalid_argument("enroll: no feature vectors");
  ByteWriter w;
  w.str16(identity);
  w.blob32(serialize_params(params_));
  w.blob32(serialize_public_bundle(keys_.pub, params_));
  if (features.size() > 0xffff) throw std::invalid_argument("enroll: too many templates");
  w.u16(static_cast<std::uint16_t>(features.size()));
  for (const auto& f : features)
    w.blob32(serialize_encrypted_template(make_template(f, options, keys_.pub.pk, params_, rng),
                                          params_));
  if (switch_keys.size() > 0xffff) throw std::invalid_argument("enroll: too many switch keys");
  w.u16(static_cast<std::uint16_t>(switch_keys.size()));
  for (const auto& k : switch_keys) w.blob32(serialize_keyswitch_key(k, params_));

  Bytes ack = round_trip(ch, MessageType::enroll, w.bytes(), MessageType::enroll_ack);
  ByteReader r(ack);
  std::size_t stored = r.u16();
  if (!r.done() || stored != features.size())
    throw ProtocolError("enrollment acknowledgment does not match the request");
}

Client::VerifyResult Client::verify(ByteChannel& ch, const std::string& identity,
                                    std::span<const double> feature, double threshold,
                                    const MatchOptions& options, SeedableRng& rng) {
  if (identity.empty()) throw std::invalid_argument("verify: empty identity");
  ByteWriter w;
  w.str16(identity);
  w.blob32(serialize_encrypted_template(make_template(feature, options, keys_.pub.pk, params_, rng),
                                        params_));
  w.u8(options.send_probe_key ? 1 : 0);
  if (options.send_probe_key) w.blob32(serialize_public_bundle(keys_.pub, params_));

  Bytes resp = round_trip(ch, MessageType::auth_request, w.bytes(), MessageType::score_response);
  ByteReader r(resp);
  std::size_t count = r.u16();
  if (count == 0) throw ProtocolError("score response with no scores");
  VerifyResult result;
  result.raw_integers.reserve(count);
  result.dissimilarities.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    MatchScore s = parse_match_score(r.blob32(), params_);
    std::int64_t raw = decrypt_score_integer(s, keys_.sk, params_);
    result.raw_integers.push_back(raw);
    result.dissimilarities.push_back(dequantize_score(raw, s.delta));
  }
  if (!r.done()) throw ProtocolError("trailing bytes after score response");

  if (options.aggregation == ScoreAggregation::minimum) {
    result.aggregate =
        *std::min_element(result.dissimilarities.begin(), result.dissimilarities.end());
  } else {
    double sum = 0.0;
    for (double d : result.dissimilarities) sum += d;
    result.aggregate = sum / static_cast<double>(result.dissimilarities.size());
  }
  double decision_value = std::clamp(result.aggregate, 0.0, 2.0);
  result.accept = decision_value <= threshold;
  return result;
}

// ---------------------------------------------------------------------------
// Server
// ---------------------------------------------------------------------------

Server::Server(TemplateStore& store, const EncryptionParams& params)
    : store_(store), params_(params) {}

bool Server::serve_session(ByteChannel& ch) {
  std::optional<Frame> frame;
  try {
    frame = read_frame(ch);
  } catch (const ProtocolError& e) {
    // The byte stream is desynchronized: answer best-effort and tear down.
    try {
      send_error(ch, ProtocolErrorCode::malformed, e.what());
    } catch (...) {
      // peer already gone; the session still tears down cleanly
    }
    return false;
  }
  if (!frame) return false;
  // Sample the tap after the frame arrives so a tap installed before the
  // client's first request is guaranteed to observe that request's parses
  // (the channel handoff orders the installation before this read).
  std::optional<ParseObserverGuard> guard;
  if (tap_) guard.emplace(tap_);
  try {
    switch (frame->type) {
      case MessageType::enroll:
        handle_enroll(ch, frame->payload);
        break;
      case MessageType::auth_request:
        handle_auth(ch, frame->payload);
        break;
      default:
        reject(ProtocolErrorCode::malformed, "message type is not a request");
    }
  } catch (const Reject& r) {
    try {
      send_error(ch, r.code, r.message);
    } catch (...) {
    }
  } catch (const SerializationError& e) {
    try {
      send_error(ch, ProtocolErrorCode::malformed, e.what());
    } catch (...) {
    }
  } catch (const std::overflow_error& e) {
    try {
      send_error(ch, ProtocolErrorCode::params, e.what());
    } catch (...) {
    }
  } catch (const std::invalid_argument& e) {
    try {
      send_error(ch, ProtocolErrorCode::params, e.what());
    } catch (...) {
    }
  } catch (const std::exception& e) {
    try {
      send_error(ch, ProtocolErrorCode::internal, e.what());
    } catch (...) {
    }
  }
  return true;
}

void Server::handle_enroll(ByteChannel& ch, ByteView payload) {
  ByteReader r(payload);
  std::string identity = r.str16();
  if (identity.empty()) reject(ProtocolErrorCode::malformed, "empty identity");

  EncryptionParams client_params = parse_params(r.blob32());
  if (client_params != params_)
    reject(ProtocolErrorCode::params, "enrollment parameters differ from the server's");

  auto bundle_blob = r.blob32();
  PublicBundle bundle = parse_public_bundle(bundle_blob, params_);

  std::size_t tcount = r.u16();
  if (tcount == 0) reject(ProtocolErrorCode::malformed, "enrollment with no templates");
  EnrollmentRecord record;
  record.identity = identity;
  record.params_digest = params_.digest();
  record.public_key_id = bundle.pk.key_id;
  record.public_blob.assign(bundle_blob.begin(), bundle_blob.end());
  for (std::size_t i = 0; i < tcount; ++i) {
    auto blob = r.blob32();
    EncryptedTemplate t = parse_encrypted_template(blob, params_);
    if (t.key_id != bundle.pk.key_id)
      reject(ProtocolErrorCode::params, "template key differs from the enrollment key");
    record.template_blobs.emplace_back(blob.begin(), blob.end());
  }
  std::size_t kcount = r.u16();
  for (std::size_t i = 0; i < kcount; ++i) {
    auto blob = r.blob32();
    KeySwitchKey ksk = parse_keyswitch_key(blob, params_);
    if (ksk.source_key_id != bundle.pk.key_id && ksk.target_key_id != bundle.pk.key_id)
      reject(ProtocolErrorCode::params, "switch key unrelated to the enrollment key");
    record.keyswitch_blobs.emplace_back(blob.begin(), blob.end());
  }
  if (!r.done()) reject(ProtocolErrorCode::malformed, "trailing bytes in enrollment");

  try {
    store_.put(record);
  } catch (const std::invalid_argument&) {
    reject(ProtocolErrorCode::duplicate, "identity '" + identity + "' is already enrolled");
  }

  ByteWriter ack;
  ack.u16(static_cast<std::uint16_t>(tcount));
  write_frame(ch, MessageType::enroll_ack, ack.bytes());
}

void Server::handle_auth(ByteChannel& ch, ByteView payload) {
  ByteReader r(payload);
  std::string identity = r.str16();
  EncryptedTemplate probe = parse_encrypted_template(r.blob32(), params_);
  std::uint8_t has_key = r.u8();
  if (has_key > 1) reject(ProtocolErrorCode::malformed, "bad probe-key flag");
  if (has_key) (void)parse_public_bundle(r.blob32(), params_);
  if (!r.done()) reject(ProtocolErrorCode::malformed, "trailing bytes in auth request");

  auto record = store_.get(identity);
  if (!record) reject(ProtocolErrorCode::unknown_identity, "identity '" + identity +
                                                               "' is not enrolled");

  PublicBundle bundle = parse_public_bundle(record->public_blob, params_);

  // Cross-key probes need both provisioned directions: probe -> template to
  // score, template -> probe so the client can decrypt the result.
  std::optional<KeySwitchKey> to_template;
  std::optional<KeySwitchKey> to_probe;
  if (probe.key_id != record->public_key_id) {
    for (const auto& blob : record->keyswitch_blobs) {
      KeySwitchKey k = parse_keyswitch_key(blob, params_);
      if (k.source_key_id == probe.key_id && k.target_key_id == record->public_key_id)
        to_template = std::move(k);
      else if (k.source_key_id == record->public_key_id && k.target_key_id == probe.key_id)
        to_probe = std::move(k);
    }
    if (!to_template || !to_probe)
      reject(ProtocolErrorCode::no_switch_key,
             "no key-switch material provisioned for the probe key");
    for (auto& ct : probe.cts) ct = key_switch(ct, *to_template, params_);
    probe.key_id = record->public_key_id;
  }

  ByteWriter resp;
  if (record->template_blobs.size() > 0xffff)
    reject(ProtocolErrorCode::internal, "record holds too many templates");
  resp.u16(static_cast<std::uint16_t>(record->template_blobs.size()));
  for (const auto& blob : record->template_blobs) {
    EncryptedTemplate enrolled = parse_encrypted_template(blob, params_);
    MatchScore s = score(enrolled, probe, bundle.ek, bundle.gks, params_);
    if (to_probe) {
      for (auto& ct : s.encrypted) ct = key_switch(ct, *to_probe, params_);
    }
    resp.blob32(serialize_match_score(s, params_));
  }
  write_frame(ch, MessageType::score_response, resp.bytes());
}

void run_tcp_server(TcpListener& listener, Server& server) {
  std::vector<std::thread> sessions;
  while (true) {
    auto ch = listener.accept();
    if (!ch) break;
    sessions.emplace_back(
        [&server, channel = std::shared_ptr<ByteChannel>(std::move(ch))]() mutable {
          try {
            server.serve_session(*channel);
          } catch (...) {
            // transport failure mid-session; nothing to report to
          }
          channel->close();
        });
  }
  for (auto& t : sessions) t.join();
}

}  // namespace hematch
