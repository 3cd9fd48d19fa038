// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#include "hematch/feature_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hematch {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("feature CSV line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& field, std::size_t line) {
  if (field.empty()) fail(line, "empty feature field");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) fail(line, "malformed number '" + field + "'");
  if (errno == ERANGE || !std::isfinite(v)) fail(line, "number out of range '" + field + "'");
  return v;
}

}  // namespace

std::vector<FeatureRecord> read_feature_csv(std::istream& in) {
  std::vector<FeatureRecord> records;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    FeatureRecord rec;
    std::size_t pos = 0;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) fail(lineno, "record has a label but no features");
    rec.label = line.substr(0, comma);
    pos = comma + 1;
    while (true) {
      comma = line.find(',', pos);
      std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos);
      rec.features.push_back(parse_double(field, lineno));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (records.empty()) {
      dim = rec.features.size();
    } else if (rec.features.size() != dim) {
      fail(lineno, "row has " + std::to_string(rec.features.size()) + " features, expected " +
                       std::to_string(dim));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<FeatureRecord> read_feature_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature CSV '" + path + "'");
  return read_feature_csv(in);
}

void write_feature_csv(std::ostream& out, std::span<const FeatureRecord> records) {
  out << std::setprecision(17);
  for (const auto& rec : records) {
    if (rec.label.find(',') != std::string::npos || rec.label.find('\n') != std::string::npos)
      throw std::runtime_error("feature CSV labels may not contain commas or newlines");
    out << rec.label;
    for (double f : rec.features) out << ',' << f;
    out << '\n';
  }
}

void write_feature_csv_file(const std::string& path, std::span<const FeatureRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot create feature CSV '" + path + "'");
  write_feature_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("failed writing feature CSV '" + path + "'");
}

}  // namespace hematch
