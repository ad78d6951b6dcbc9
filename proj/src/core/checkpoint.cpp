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

#include "checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace ctcx {

namespace {

using json = nlohmann::json;
using Reason = CheckpointError::Reason;

constexpr char kMagic[4] = {'C', 'T', 'C', 'X'};
constexpr size_t kPreambleBytes = 16;  // magic + u32 version + u64 header length
constexpr uint64_t kMaxHeaderBytes = 16u << 20;

size_t align_up(size_t n) {
  return (n + kCheckpointAlignment - 1) / kCheckpointAlignment * kCheckpointAlignment;
}

void put_le(std::string& out, uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t get_le(const unsigned char* b, int bytes) {
  uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

int64_t element_count(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<int64_t>& shape) {
  std::string s;
  for (size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

std::vector<int64_t> expected_shape(const ModelConfig& cfg, const std::string& name) {
  const auto [rows, cols] = tensor_shape(cfg, name);
  if (name.ends_with(".bias") || name == "dense.b") return {rows};
  return {rows, cols};
}

json config_to_json(const ModelConfig& cfg) {
  return {{"hidden", cfg.hidden},           {"num_layers", cfg.num_layers},
          {"bidirectional", cfg.bidirectional}, {"dropout_keep", cfg.dropout_keep},
          {"feature_dim", cfg.feature_dim}, {"num_classes", cfg.num_classes},
          {"seed", cfg.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.hidden = j.at("hidden").get<int>();
  cfg.num_layers = j.at("num_layers").get<int>();
  cfg.bidirectional = j.at("bidirectional").get<bool>();
  cfg.dropout_keep = j.value("dropout_keep", 0.5);
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.num_classes = j.at("num_classes").get<int>();
  cfg.seed = j.value("seed", uint64_t{0});
  return cfg;
}

void check_shape(const CheckpointTensor& t, const ModelConfig& cfg) {
  const std::vector<int64_t> want = expected_shape(cfg, t.name);
  if (t.shape != want) {
    throw CheckpointError(Reason::kShape, "tensor '" + t.name + "' has shape " +
                                              shape_str(t.shape) + ", expected " +
                                              shape_str(want));
  }
}

}  // namespace

const CheckpointTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const CheckpointTensor& Checkpoint::at(const std::string& name) const {
  const CheckpointTensor* t = find(name);
  if (t == nullptr) throw CheckpointError(Reason::kShape, "checkpoint has no tensor '" + name + "'");
  return *t;
}

std::optional<Alphabet> Checkpoint::alphabet() const {
  if (alphabet_symbols.empty()) return std::nullopt;
  return Alphabet(alphabet_name, alphabet_symbols);
}

Checkpoint make_checkpoint(const ModelParams& params, const ModelConfig& cfg,
                           const Alphabet& alphabet) {
  cfg.validate();
  params.check_shapes(cfg);
  if (cfg.num_classes != alphabet.num_classes()) {
    throw UsageError("model has " + std::to_string(cfg.num_classes) + " classes, alphabet '" +
                     alphabet.name() + "' has " + std::to_string(alphabet.num_classes()));
  }
  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.alphabet_name = alphabet.name();
  ckpt.alphabet_symbols = alphabet.symbols();
  for (const auto& view : params.tensors()) {
    CheckpointTensor t;
    t.name = view.name;
    t.shape = view.is_vector ? std::vector<int64_t>{view.rows}
                             : std::vector<int64_t>{view.rows, view.cols};
    t.data.assign(view.data, view.data + view.size());
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json table = json::array();
  size_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    if (static_cast<int64_t>(t.data.size()) != element_count(t.shape)) {
      throw UsageError("tensor '" + t.name + "' data does not match its shape");
    }
    const size_t bytes = t.data.size() * sizeof(float);
    table.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"bytes", bytes}});
    offset = align_up(offset + bytes);
  }
  json symbols = json::array();
  for (char32_t cp : ckpt.alphabet_symbols) symbols.push_back(utf8_encode(cp));
  const json header = {{"config", config_to_json(ckpt.config)},
                       {"alphabet_name", ckpt.alphabet_name},
                       {"alphabet_symbols", symbols},
                       {"tensors", table}};
  const std::string header_text = header.dump();

  std::string out(kMagic, 4);
  put_le(out, ckpt.format_version, 4);
  put_le(out, header_text.size(), 8);
  out += header_text;
  out.resize(align_up(out.size()), '\0');
  const size_t payload_start = out.size();
  for (size_t i = 0; i < ckpt.tensors.size(); ++i) {
    out.resize(payload_start + table[i]["offset"].get<size_t>(), '\0');
    for (float v : ckpt.tensors[i].data) put_le(out, std::bit_cast<uint32_t>(v), 4);
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError(Reason::kOpen, "cannot write checkpoint " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError(Reason::kOpen, "failed writing checkpoint " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError(Reason::kOpen, "cannot open checkpoint " + path);
  f.seekg(0, std::ios::end);
  const auto file_size = static_cast<uint64_t>(f.tellg());
  f.seekg(0);

  unsigned char pre[kPreambleBytes];
  if (file_size < kPreambleBytes || !f.read(reinterpret_cast<char*>(pre), kPreambleBytes)) {
    throw CheckpointError(Reason::kTruncated, path + ": truncated checkpoint preamble");
  }
  if (std::memcmp(pre, kMagic, 4) != 0) {
    throw CheckpointError(Reason::kMagic, path + ": not a ctcx checkpoint (bad magic)");
  }
  Checkpoint ckpt;
  ckpt.format_version = static_cast<uint32_t>(get_le(pre + 4, 4));
  if (ckpt.format_version != kCheckpointVersion) {
    throw CheckpointError(Reason::kVersion, path + ": unsupported checkpoint version " +
                                                std::to_string(ckpt.format_version));
  }
  const uint64_t header_bytes = get_le(pre + 8, 8);
  if (header_bytes > kMaxHeaderBytes) {
    throw CheckpointError(Reason::kHeader, path + ": implausible header length");
  }
  if (kPreambleBytes + header_bytes > file_size) {
    throw CheckpointError(Reason::kTruncated, path + ": truncated checkpoint header");
  }
  std::string header_text(header_bytes, '\0');
  f.read(header_text.data(), static_cast<std::streamsize>(header_bytes));

  json header;
  std::vector<std::pair<uint64_t, uint64_t>> spans;  // offset, bytes
  try {
    header = json::parse(header_text);
    ckpt.config = config_from_json(header.at("config"));
    ckpt.alphabet_name = header.at("alphabet_name").get<std::string>();
    if (header.contains("alphabet_symbols")) {
      for (const auto& s : header["alphabet_symbols"]) {
        const std::u32string cps = utf8_decode(s.get<std::string>());
        if (cps.size() != 1) throw CheckpointError(Reason::kHeader, path + ": bad alphabet symbol");
        ckpt.alphabet_symbols.push_back(cps[0]);
      }
    }
    for (const auto& entry : header.at("tensors")) {
      CheckpointTensor t;
      t.name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<int64_t>>();
      spans.emplace_back(entry.at("offset").get<uint64_t>(), entry.at("bytes").get<uint64_t>());
      ckpt.tensors.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw CheckpointError(Reason::kHeader, path + ": malformed header: " + e.what());
  }
  try {
    ckpt.config.validate();
  } catch (const UsageError& e) {
    throw CheckpointError(Reason::kHeader, path + ": " + e.what());
  }

  // The tensor table must name exactly the canonical tensors, each with the
  // shape its config implies and a byte count matching that shape.
  const std::vector<std::string> names = tensor_names(ckpt.config);
  std::set<std::string> seen;
  for (size_t i = 0; i < ckpt.tensors.size(); ++i) {
    const CheckpointTensor& t = ckpt.tensors[i];
    if (!seen.insert(t.name).second) {
      throw CheckpointError(Reason::kHeader, path + ": duplicate tensor '" + t.name + "'");
    }
    if (std::find(names.begin(), names.end(), t.name) == names.end()) {
      throw CheckpointError(Reason::kHeader, path + ": unexpected tensor '" + t.name + "'");
    }
    check_shape(t, ckpt.config);
    if (spans[i].second != static_cast<uint64_t>(element_count(t.shape)) * sizeof(float)) {
      throw CheckpointError(Reason::kShape, path + ": tensor '" + t.name + "' declares " +
                                                std::to_string(spans[i].second) +
                                                " bytes for shape " + shape_str(t.shape));
    }
  }
  if (seen.size() != names.size()) {
    for (const auto& n : names) {
      if (!seen.count(n)) throw CheckpointError(Reason::kHeader, path + ": missing tensor '" + n + "'");
    }
  }

  const uint64_t payload_start = align_up(kPreambleBytes + header_bytes);
  for (size_t i = 0; i < ckpt.tensors.size(); ++i) {
    const auto [offset, bytes] = spans[i];
    if (payload_start + offset + bytes > file_size) {
      throw CheckpointError(Reason::kTruncated, path + ": payload of '" + ckpt.tensors[i].name +
                                                    "' runs past end of file");
    }
  }

  for (size_t i = 0; i < ckpt.tensors.size(); ++i) {
    const auto [offset, bytes] = spans[i];
    std::vector<unsigned char> raw(bytes);
    f.seekg(static_cast<std::streamoff>(payload_start + offset));
    if (!f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes))) {
      throw CheckpointError(Reason::kTruncated, path + ": short read in '" + ckpt.tensors[i].name + "'");
    }
    auto& data = ckpt.tensors[i].data;
    data.resize(bytes / sizeof(float));
    for (size_t k = 0; k < data.size(); ++k) {
      data[k] = std::bit_cast<float>(static_cast<uint32_t>(get_le(raw.data() + 4 * k, 4)));
    }
  }
  return ckpt;
}

ModelParams params_from_checkpoint(const Checkpoint& ckpt) {
  ModelParams params = init_params(ckpt.config);
  for (auto& view : params.tensors()) {
    const CheckpointTensor& t = ckpt.at(view.name);
    check_shape(t, ckpt.config);
    for (size_t k = 0; k < t.data.size(); ++k) {
      if (!std::isfinite(t.data[k])) {
        throw CheckpointError(Reason::kShape, "tensor '" + t.name + "' holds a non-finite value");
      }
    }
    std::copy(t.data.begin(), t.data.end(), view.data);
  }
  return params;
}

void save_checkpoint(const ModelParams& params, const ModelConfig& cfg, const Alphabet& alphabet,
                     const std::string& path) {
  write_checkpoint(make_checkpoint(params, cfg, alphabet), path);
}

LoadedModel load_checkpoint(const std::string& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  return {params_from_checkpoint(ckpt), ckpt.config, ckpt.alphabet_name, ckpt.alphabet()};
}

LoadedModel load_checkpoint(const std::string& path, const ModelConfig& expected) {
  const Checkpoint ckpt = read_checkpoint(path);
  for (const auto& t : ckpt.tensors) check_shape(t, expected);
  if (ckpt.config.directions() != expected.directions() ||
      ckpt.config.num_layers != expected.num_layers) {
    throw CheckpointError(Reason::kShape, path + ": layer layout differs from the expected model");
  }
  return {params_from_checkpoint(ckpt), ckpt.config, ckpt.alphabet_name, ckpt.alphabet()};
}

}  // namespace ctcx
