// Copyright 2026 The hematch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hematch {

/// One labeled feature vector, as ingested from CSV.
struct FeatureRecord {
  std::string label;
  std::vector<double> features;
};

/// Parse the shared ingestion format: UTF-8 CSV, one record per line,
/// `label,f1,f2,...,fd` with d constant across the file, floats in decimal
/// notation, no header row. Blank lines are skipped. Throws
/// std::runtime_error naming the line on malformed numbers, ragged rows, or
/// rows without features.
std::vector<FeatureRecord> read_feature_csv(std::istream& in);
std::vector<FeatureRecord> read_feature_csv_file(const std::string& path);

void write_feature_csv(std::ostream& out, std::span<const FeatureRecord> records);
void write_feature_csv_file(const std::string& path, std::span<const FeatureRecord> records);

}  // namespace hematch
