// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/store.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "hematch/bytes.hpp"
#include "hematch/errors.hpp"
#include "hematch/rng.hpp"

namespace hematch {
namespace {

constexpr std::uint8_t kOpPut = 1;
constexpr std::uint8_t kOpDelete = 2;

Bytes encode_record(const EnrollmentRecord& rec) {
  ByteWriter w;
  w.str16(rec.identity);
  w.raw(ByteView(rec.params_digest.data(), rec.params_digest.size()));
  w.u64(rec.public_key_id);
  w.blob32(rec.public_blob);
  if (rec.template_blobs.empty() || rec.template_blobs.size() > 0xffff)
    throw std::invalid_argument("enrollment record must hold 1..65535 templates");
  w.u16(static_cast<std::uint16_t>(rec.template_blobs.size()));
  for (const auto& t : rec.template_blobs) w.blob32(t);
  if (rec.keyswitch_blobs.size() > 0xffff)
    throw std::invalid_argument("too many key-switch blobs");
  w.u16(static_cast<std::uint16_t>(rec.keyswitch_blobs.size()));
  for (const auto& k : rec.keyswitch_blobs) w.blob32(k);
  return w.take();
}

EnrollmentRecord decode_record(ByteView payload) {
  ByteReader r(payload);
  EnrollmentRecord rec;
  rec.identity = r.str16();
  auto d = r.raw(32);
  std::memcpy(rec.params_digest.data(), d.data(), 32);
  rec.public_key_id = r.u64();
  auto pk = r.blob32();
  rec.public_blob.assign(pk.begin(), pk.end());
  std::size_t tcount = r.u16();
  rec.template_blobs.reserve(tcount);
  for (std::size_t i = 0; i < tcount; ++i) {
    auto t = r.blob32();
    rec.template_blobs.emplace_back(t.begin(), t.end());
  }
  std::size_t kcount = r.u16();
  rec.keyswitch_blobs.reserve(kcount);
  for (std::size_t i = 0; i < kcount; ++i) {
    auto k = r.blob32();
    rec.keyswitch_blobs.emplace_back(k.begin(), k.end());
  }
  if (!r.done()) throw SerializationError("trailing bytes after enrollment record");
  return rec;
}

}  // namespace

bool operator==(const EnrollmentRecord& a, const EnrollmentRecord& b) {
  return a.identity == b.identity && a.params_digest == b.params_digest &&
         a.public_key_id == b.public_key_id && a.public_blob == b.public_blob &&
         a.template_blobs == b.template_blobs && a.keyswitch_blobs == b.keyswitch_blobs;
}

TemplateStore::TemplateStore(const std::string& path) : path_(path) {
  replay();
  log_.open(path_, std::ios::binary | std::ios::app);
  if (!log_) throw std::runtime_error("cannot open store log '" + path_ + "' for append");
}

void TemplateStore::replay() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // fresh store
  std::vector<unsigned char> body;
  while (true) {
    unsigned char lenbuf[4];
    in.read(reinterpret_cast<char*>(lenbuf), 4);
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != 4) throw IntegrityError("store log: truncated entry length");
    std::uint32_t len = static_cast<std::uint32_t>(lenbuf[0]) |
                        (static_cast<std::uint32_t>(lenbuf[1]) << 8) |
                        (static_cast<std::uint32_t>(lenbuf[2]) << 16) |
                        (static_cast<std::uint32_t>(lenbuf[3]) << 24);
    if (len == 0) throw IntegrityError("store log: empty entry");
    body.resize(len);
    in.read(reinterpret_cast<char*>(body.data()), len);
    if (static_cast<std::uint32_t>(in.gcount()) != len)
      throw IntegrityError("store log: truncated entry body");
    std::array<unsigned char, 32> want;
    in.read(reinterpret_cast<char*>(want.data()), 32);
    if (in.gcount() != 32) throw IntegrityError("store log: truncated entry checksum");
    if (sha256(body) != want) throw IntegrityError("store log: entry checksum mismatch");
    std::uint8_t op = body[0];
    ByteView payload(body.data() + 1, body.size() - 1);
    if (op == kOpPut) {
      EnrollmentRecord rec = decode_record(payload);
      if (index_.count(rec.identity))
        throw IntegrityError("store log: duplicate enrollment for '" + rec.identity + "'");
      index_.emplace(rec.identity, std::move(rec));
    } else if (op == kOpDelete) {
      ByteReader r(payload);
      std::string identity = r.str16();
      if (!r.done()) throw SerializationError("trailing bytes after tombstone");
      if (index_.erase(identity) == 0)
        throw IntegrityError("store log: tombstone for unknown '" + identity + "'");
    } else {
      throw IntegrityError("store log: unknown entry op");
    }
  }
}

void TemplateStore::append_entry(std::uint8_t op, ByteView payload) {
  ByteWriter body;
  body.u8(op);
  body.raw(payload);
  auto checksum = sha256(body.bytes());
  ByteWriter entry;
  entry.blob32(body.bytes());
  entry.raw(ByteView(checksum.data(), checksum.size()));
  const auto& bytes = entry.bytes();
  log_.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  log_.flush();
  if (!log_) throw std::runtime_error("store log append failed on '" + path_ + "'");
}

void TemplateStore::put(const EnrollmentRecord& record) {
  if (record.identity.empty()) throw std::invalid_argument("store: empty identity");
  Bytes payload = encode_record(record);
  std::unique_lock lock(mutex_);
  if (index_.count(record.identity))
    throw std::invalid_argument("store: identity '" + record.identity + "' already enrolled");
  append_entry(kOpPut, payload);
  index_.emplace(record.identity, record);
}

std::optional<EnrollmentRecord> TemplateStore::get(const std::string& identity) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(identity);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool TemplateStore::contains(const std::string& identity) const {
  std::shared_lock lock(mutex_);
  return index_.count(identity) != 0;
}

void TemplateStore::remove(const std::string& identity) {
  std::unique_lock lock(mutex_);
  if (!index_.count(identity))
    throw std::invalid_argument("store: identity '" + identity + "' not enrolled");
  ByteWriter w;
  w.str16(identity);
  append_entry(kOpDelete, w.bytes());
  index_.erase(identity);
}

std::vector<std::string> TemplateStore::identities() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  out.reserve(index_.size());
  for (const auto& [id, rec] : index_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t TemplateStore::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

}  // namespace hematch
