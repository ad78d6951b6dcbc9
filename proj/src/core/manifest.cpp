// Copyright 2026 The ctcx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "frontend.hpp"

namespace ctcx {

namespace {

using json = nlohmann::json;

constexpr char kCacheMagic[4] = {'M', 'F', 'C', 'C'};
constexpr size_t kCacheHeaderBytes = 16;

void put_le32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_le32(const unsigned char* b) {
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

std::pair<uint32_t, uint32_t> parse_cache_header(std::istream& in, const std::string& path) {
  unsigned char header[kCacheHeaderBytes];
  if (!in.read(reinterpret_cast<char*>(header), kCacheHeaderBytes)) {
    throw DataError(path + ": truncated feature cache header");
  }
  if (std::memcmp(header, kCacheMagic, 4) != 0) throw DataError(path + ": bad feature cache magic");
  const uint32_t version = get_le32(header + 4);
  if (version != kFeatureCacheVersion) {
    throw DataError(path + ": unsupported feature cache version " + std::to_string(version));
  }
  return {get_le32(header + 8), get_le32(header + 12)};
}

}  // namespace

void write_feature_cache(const MatrixD& values, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write feature cache " + path);
  out.write(kCacheMagic, 4);
  put_le32(out, kFeatureCacheVersion);
  put_le32(out, static_cast<uint32_t>(values.rows()));
  put_le32(out, static_cast<uint32_t>(values.cols()));
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    for (Eigen::Index f = 0; f < values.cols(); ++f) {
      put_le32(out, std::bit_cast<uint32_t>(static_cast<float>(values(t, f))));
    }
  }
  if (!out) throw DataError("failed writing feature cache " + path);
}

std::pair<uint32_t, uint32_t> read_feature_cache_shape(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature cache " + path);
  return parse_cache_header(in, path);
}

MatrixD read_feature_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature cache " + path);
  const auto [frames, dim] = parse_cache_header(in, path);
  const size_t count = static_cast<size_t>(frames) * dim;
  std::vector<unsigned char> payload(count * 4);
  if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()))) {
    throw DataError(path + ": truncated feature cache payload");
  }
  MatrixD values(frames, dim);
  for (size_t i = 0; i < count; ++i) {
    values.data()[i] = std::bit_cast<float>(get_le32(payload.data() + 4 * i));
  }
  return values;
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  std::vector<ManifestRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
    ManifestRow row;
    if (obj.contains("audio")) {
      if (!obj["audio"].is_string()) throw DataError(where + ": \"audio\" must be a string");
      row.audio = obj["audio"].get<std::string>();
    }
    if (!obj.contains("text") || !obj["text"].is_string()) {
      throw DataError(where + ": missing string field \"text\"");
    }
    row.text = obj["text"].get<std::string>();
    if (obj.contains("duration_s") && !obj["duration_s"].is_null()) {
      if (!obj["duration_s"].is_number()) throw DataError(where + ": \"duration_s\" must be a number");
      row.duration_s = obj["duration_s"].get<double>();
    }
    if (obj.contains("features") && obj["features"].is_string()) {
      row.features = obj["features"].get<std::string>();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path);
  for (const ManifestRow& row : rows) {
    json obj = {{"audio", row.audio}, {"text", row.text}};
    if (row.duration_s) obj["duration_s"] = *row.duration_s;
    if (!row.features.empty()) obj["features"] = row.features;
    out << obj.dump() << '\n';
  }
}

std::vector<ManifestRow> duration_filter(const std::vector<ManifestRow>& rows) {
  std::vector<ManifestRow> kept;
  kept.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].duration_s) {
      throw DataError("manifest row " + std::to_string(i) + " (" + rows[i].audio +
                      ") has no duration_s");
    }
    if (*rows[i].duration_s <= kMaxUtteranceSeconds) kept.push_back(rows[i]);
  }
  return kept;
}

}  // namespace ctcx
