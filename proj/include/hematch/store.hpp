// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "hematch/serialize.hpp"

namespace hematch {

/// Everything the server keeps for one enrolled identity. Template and key
/// blobs are stored as the exact bytes the client sent; the store never
/// parses them beyond what its own framing needs.
struct EnrollmentRecord {
  std::string identity;
  std::array<unsigned char, 32> params_digest{};
  std::uint64_t public_key_id = 0;
  /// Serialized public bundle (encryption + evaluation + rotation keys).
  Bytes public_blob;
  std::vector<Bytes> template_blobs;
  /// Serialized KeySwitchKeys provisioned for cross-key authentication.
  std::vector<Bytes> keyswitch_blobs;
};

bool operator==(const EnrollmentRecord& a, const EnrollmentRecord& b);

/// Durable identity -> EnrollmentRecord map: an append-only log file replayed
/// into an in-memory index on open. Every log entry carries its own SHA-256;
/// a mismatch on replay raises IntegrityError rather than serving corrupt
/// key material. Deletes are tombstone entries, which is what makes
/// revocation an append like any other.
///
/// Concurrency: one writer at a time, readers concurrent (shared_mutex); a
/// single store object may be shared across server sessions.
class TemplateStore {
 public:
  /// Opens or creates the log at `path` and replays it.
  explicit TemplateStore(const std::string& path);

  /// Appends the record. Throws std::invalid_argument on duplicate identity.
  void put(const EnrollmentRecord& record);

  std::optional<EnrollmentRecord> get(const std::string& identity) const;
  bool contains(const std::string& identity) const;

  /// Appends a tombstone. Throws std::invalid_argument when absent.
  void remove(const std::string& identity);

  /// Enrolled identities in lexicographic order.
  std::vector<std::string> identities() const;

  std::size_t size() const;
  const std::string& path() const { return path_; }

 private:
  void append_entry(std::uint8_t op, ByteView payload);
  void replay();

  std::string path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, EnrollmentRecord> index_;
  std::ofstream log_;
};

}  // namespace hematch
