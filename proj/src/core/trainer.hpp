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

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "frontend.hpp"
#include "network.hpp"
#include "rng.hpp"
#include "text_labels.hpp"

namespace ctcx {

enum class Decoder { kGreedy, kBeam };

struct TrainConfig {
  double learning_rate = 0.0005;
  double momentum = 0.9;
  int batch_size = 4;
  int epochs = 500;
  double dropout_keep = 0.5;
  std::array<double, 3> split = {0.8, 0.1, 0.1};
  // <= 0 disables clipping.
  double grad_clip_norm = 5.0;
  uint64_t seed = 0;
  Decoder eval_decoder = Decoder::kGreedy;
  int beam_width = 8;
  // When set, every utterance's dropout mask is derived from this seed and
  // its dataset index only, so masks repeat across epochs.
  std::optional<uint64_t> fixed_dropout_seed;

  void validate() const;
};

// One utterance ready for training: normalized features and its labels.
struct Utterance {
  std::string id;
  std::string text;
  Mat<float> features;  // T x F
  LabelSeq labels;
};

struct MetricsRow {
  int epoch = 0;
  double train_cost = 0.0;
  double train_ler = 0.0;
  double val_cost = 0.0;
  double val_ler = 0.0;
};

struct OptimizerState {
  ModelParams velocity;

  static OptimizerState zeros_like(const ModelParams& params) {
    return {params.zeros_like()};
  }
};

template <typename T>
struct DatasetSplit {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

// Seeded shuffle, then floor(n * p) rows for val and test, remainder to
// train. Needs at least 10 rows.
std::array<std::vector<size_t>, 3> split_indices(size_t n, const std::array<double, 3>& split,
                                                 uint64_t seed);

template <typename T>
DatasetSplit<T> split_dataset(const std::vector<T>& rows, const std::array<double, 3>& split,
                              uint64_t seed) {
  const auto idx = split_indices(rows.size(), split, seed);
  DatasetSplit<T> out;
  for (size_t i : idx[0]) out.train.push_back(rows[i]);
  for (size_t i : idx[1]) out.val.push_back(rows[i]);
  for (size_t i : idx[2]) out.test.push_back(rows[i]);
  return out;
}

double global_norm(const ModelParams& grads);

struct StepOutcome {
  bool applied = true;
  double grad_norm = 0.0;     // before clipping
  double clipped_norm = 0.0;  // norm of the gradient actually applied
  std::string event;          // non-empty when the step was skipped
};

// Classical momentum after global-norm clipping:
//   v <- mu * v + g;  theta <- theta - lr * v.
// A non-finite gradient leaves params and state untouched.
StepOutcome momentum_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
                          const TrainConfig& cfg);

struct EpochStats {
  double avg_cost = 0.0;  // mean per-utterance CTC loss
  double cost_sum = 0.0;  // total over the epoch
  double ler = 0.0;       // corpus LER
  int skipped_steps = 0;
};

using LogFn = std::function<void(const std::string&)>;

// One pass over `data` in batches of cfg.batch_size (last batch may be
// short). Utterance order is reshuffled from `rng`. Gradients are summed in
// batch order and divided by the batch size. LER comes from greedy decoding
// of the train-mode outputs.
EpochStats train_epoch(ModelParams& params, OptimizerState& state, const ModelConfig& model_cfg,
                       const std::vector<Utterance>& data, const TrainConfig& cfg, Rng& rng,
                       int threads = 1, const LogFn& log = {});

struct EvalStats {
  double avg_cost = 0.0;
  double ler = 0.0;
  std::vector<LabelSeq> hypotheses;
};

// Eval mode, deterministic.
EvalStats evaluate(const ModelParams& params, const ModelConfig& model_cfg,
                   const std::vector<Utterance>& data, Decoder decoder, int beam_width,
                   int threads = 1);

LabelSeq decode_logits(const Mat<float>& logits, Decoder decoder, int beam_width);

struct TrainingRun {
  ModelParams params;
  std::vector<MetricsRow> history;
  std::vector<double> epoch_cost_sums;
};

// Full loop: train_epoch then evaluate on `val` each epoch. `on_epoch` sees
// every row as it is produced.
TrainingRun train_model(ModelParams params, const ModelConfig& model_cfg,
                        const std::vector<Utterance>& train, const std::vector<Utterance>& val,
                        const TrainConfig& cfg, int threads = 1, const LogFn& log = {},
                        const std::function<void(const MetricsRow&)>& on_epoch = {});

// CSV with header "epoch,train_cost,train_ler,val_cost,val_ler".
std::string metrics_csv(const std::vector<MetricsRow>& rows);

// An utterance is trainable when 2L + 1 <= T.
bool ctc_feasible(size_t num_labels, Eigen::Index frames);

struct LoadOptions {
  FeatureConfig features;
  bool normalize = true;
};

// Builds utterances from manifest rows: features from the row's cache when
// present, otherwise computed from its audio (resampled as needed). Rows
// that are CTC-infeasible are dropped with a warning through `log`.
std::vector<Utterance> load_utterances(const std::vector<ManifestRow>& rows,
                                       const Alphabet& alphabet, const LoadOptions& options,
                                       int threads = 1, const LogFn& log = {});

// Audio -> normalized MFCC, resampling to the configured rate if needed.
Mat<float> features_from_audio(const AudioClip& clip, const FeatureConfig& cfg, bool normalize);

struct ScenarioResult {
  std::string name;  // Table-style row label, e.g. "BiLSTM with Russian model"
  bool bidirectional = false;
  bool transfer = false;
  MetricsRow final_row;
  std::vector<MetricsRow> history;
  ModelParams params;
  ModelConfig config;
};

struct Improvement {
  std::string architecture;  // "LSTM" or "BiLSTM"
  // (baseline - transfer) / baseline, per metric.
  double train_cost = 0.0;
  double train_ler = 0.0;
  double val_cost = 0.0;
  double val_ler = 0.0;
};

struct ExperimentConfig {
  TrainConfig train;
  int hidden = 128;
};

struct ExperimentResult {
  std::vector<ScenarioResult> scenarios;
  std::vector<Improvement> improvements;
  std::vector<std::string> warnings;
  size_t train_size = 0;
  size_t val_size = 0;
  size_t test_size = 0;
};

// {LSTM, BiLSTM} x {random, transfer}. Every scenario trains on the same
// split with the same seed. A transfer row runs only when `sources` holds a
// checkpoint with a matching direction count; otherwise a warning is added.
ExperimentResult run_experiment_matrix(const std::vector<Utterance>& data,
                                       const Alphabet& alphabet,
                                       const std::vector<Checkpoint>& sources,
                                       const ExperimentConfig& cfg, int threads = 1,
                                       const LogFn& log = {});

// Relative improvement, 0 when the baseline is 0.
double relative_improvement(double baseline, double transfer);

// Human-readable name of an alphabet for row labels ("ru" -> "Russian").
std::string language_label(const std::string& alphabet_name);

}  // namespace ctcx
