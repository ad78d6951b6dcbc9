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

#include <map>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "network.hpp"
#include "text_labels.hpp"

namespace ctcx {

struct TransferReport {
  std::string source_alphabet;
  std::string target_alphabet;
  int source_classes = 0;
  int target_classes = 0;
  std::vector<std::string> copied;
  std::vector<std::string> reinitialized;
  std::map<std::string, std::string> skipped_reason;  // keyed by reinitialized tensor
};

struct TransferResult {
  ModelParams params;
  ModelConfig config;
  TransferReport report;
};

// Copies every recurrent tensor verbatim from `source` and initializes the
// dense head afresh (init_params scheme, keyed by `seed`) for the target
// alphabet. The source's dense tensors are never read. Any architectural
// mismatch (hidden size, layer count, direction count, feature dim) throws
// DataError before anything is produced.
TransferResult transfer_weights(const Checkpoint& source, const ModelConfig& target_cfg,
                                const Alphabet& target_alphabet, uint64_t seed);

class TransferVerificationError : public Error {
 public:
  TransferVerificationError(std::string first_divergence, const std::string& what)
      : Error(ErrorKind::kRuntime, what), first_divergence_(std::move(first_divergence)) {}
  const std::string& first_divergence() const { return first_divergence_; }

 private:
  std::string first_divergence_;
};

struct VerifyReport {
  double max_abs_deviation = 0.0;
  std::vector<double> layer_deviation;  // per recurrent layer output
  std::string first_divergence;         // tensor name, empty when identical
  bool identical() const { return max_abs_deviation == 0.0 && first_divergence.empty(); }
};

enum class VerifyMode {
  kStrict,        // any deviation throws TransferVerificationError
  kPostTraining,  // deviation is reported, not raised
};

// Runs both recurrent stacks in eval mode on every probe and compares the
// per-layer hidden outputs bit for bit.
VerifyReport verify_transfer(const ModelParams& source, const ModelParams& transferred,
                             const ModelConfig& cfg, const std::vector<Mat<float>>& probes,
                             VerifyMode mode = VerifyMode::kStrict);

}  // namespace ctcx
