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

#include <string>
#include <vector>

#include <json.hpp>

#include "frontend.hpp"
#include "trainer.hpp"

// Pipeline commands behind the C API and the CLI. Each returns a JSON
// report; failures either throw ctcx::Error or, when a partial report is
// still useful, come back as a non-zero exit code with a diagnostic.
namespace ctcx::commands {

struct Result {
  int exit_code = 0;  // 0 ok, 1 usage, 2 data, 3 runtime
  nlohmann::json report;
  std::string diagnostic;
};

FeatureConfig feature_config_from_json(const nlohmann::json& j);
nlohmann::json feature_config_to_json(const FeatureConfig& cfg);
// Reads a JSON file of FeatureConfig fields; missing keys keep defaults.
FeatureConfig load_feature_config(const std::string& path);

struct PrepareOptions {
  std::string manifest;  // ignored when synthetic_count > 0
  std::string alphabet = "kk";
  std::string out;
  size_t synthetic_count = 0;
  uint64_t synthetic_seed = 1;
  uint64_t prototype_seed = 20200101;
  FeatureConfig features;
};
Result prepare(const PrepareOptions& opts, const LogFn& log = {});

struct FeaturesOptions {
  std::string manifest;
  std::string out_dir;
  FeatureConfig features;
};
Result features(const FeaturesOptions& opts, const LogFn& log = {});

struct TrainOptions {
  std::string manifest;
  std::string alphabet = "kk";
  bool bidirectional = false;
  bool transfer_init = false;
  std::string source_checkpoint;
  std::string out_dir;
  int hidden = 128;
  bool strict_paper = false;  // disables gradient clipping
  TrainConfig train;
  FeatureConfig features;
};
Result train(const TrainOptions& opts, const LogFn& log = {});

struct TransferOptions {
  std::string source;
  std::string target_alphabet;
  std::string out;
  std::string report_path;  // default: <out>.report.json
  uint64_t seed = 0;
  int probes = 8;
};
Result transfer(const TransferOptions& opts, const LogFn& log = {});

struct EvaluateOptions {
  std::string checkpoint;
  std::string manifest;
  std::string alphabet;  // only needed when the checkpoint lacks symbols
  Decoder decoder = Decoder::kGreedy;
  int beam_width = 8;
  FeatureConfig features;
};
Result evaluate(const EvaluateOptions& opts, const LogFn& log = {});

struct DecodeOptions {
  std::string checkpoint;
  std::string wav;
  std::string alphabet;
  Decoder decoder = Decoder::kGreedy;
  int beam_width = 8;
  FeatureConfig features;
};
Result decode(const DecodeOptions& opts, const LogFn& log = {});

struct ExperimentOptions {
  std::string manifest;
  std::string alphabet = "kk";
  std::vector<std::string> source_checkpoints;
  std::string out_dir;
  int hidden = 128;
  bool strict_paper = false;
  TrainConfig train;
  FeatureConfig features;
};
Result experiment(const ExperimentOptions& opts, const LogFn& log = {});

// Table layout shared by the CLI: header plus one line per scenario.
std::string format_experiment_table(const nlohmann::json& report);

}  // namespace ctcx::commands
