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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "network.hpp"
#include "text_labels.hpp"

namespace ctcx {

// Layout:
//   "CTCX" | u32 version | u64 header_bytes | UTF-8 JSON header |
//   zero padding to a 64-byte boundary | f32 payloads in table order.
// All integers and floats little-endian. Tensor offsets in the header are
// relative to the payload start and 64-byte aligned.
inline constexpr uint32_t kCheckpointVersion = 1;
inline constexpr size_t kCheckpointAlignment = 64;

class CheckpointError : public DataError {
 public:
  enum class Reason { kOpen, kMagic, kVersion, kHeader, kShape, kTruncated };
  CheckpointError(Reason reason, const std::string& what) : DataError(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

struct CheckpointTensor {
  std::string name;
  std::vector<int64_t> shape;  // [rows, cols] for matrices, [n] for vectors
  std::vector<float> data;     // row-major
};

struct Checkpoint {
  uint32_t format_version = kCheckpointVersion;
  ModelConfig config;
  std::string alphabet_name;
  std::u32string alphabet_symbols;  // empty when unknown
  std::vector<CheckpointTensor> tensors;

  const CheckpointTensor* find(const std::string& name) const;
  const CheckpointTensor& at(const std::string& name) const;
  std::optional<Alphabet> alphabet() const;
};

Checkpoint make_checkpoint(const ModelParams& params, const ModelConfig& cfg,
                           const Alphabet& alphabet);
void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
// Validates the header (magic, version, tensor table, shapes against the
// stored config, byte counts) before touching the payload.
Checkpoint read_checkpoint(const std::string& path);

// Converts tensors into ModelParams. Rejects non-finite values.
ModelParams params_from_checkpoint(const Checkpoint& ckpt);

struct LoadedModel {
  ModelParams params;
  ModelConfig config;
  std::string alphabet_name;
  std::optional<Alphabet> alphabet;
};

void save_checkpoint(const ModelParams& params, const ModelConfig& cfg, const Alphabet& alphabet,
                     const std::string& path);
LoadedModel load_checkpoint(const std::string& path);
// Also checks every tensor against `expected`; a mismatch names the tensor.
LoadedModel load_checkpoint(const std::string& path, const ModelConfig& expected);

}  // namespace ctcx
