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

#include "trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ctc.hpp"
#include "parallel.hpp"
#include "transfer.hpp"

namespace ctcx {

namespace {

struct UtteranceGrad {
  double loss = 0.0;
  LabelSeq hypothesis;
  ModelParams grads;
};

UtteranceGrad utterance_gradient(const ModelParams& params, const ModelConfig& model_cfg,
                                 const Utterance& utt, uint64_t dropout_seed) {
  auto fwd = forward(params, model_cfg, utt.features, true, dropout_seed);
  const MatrixD log_probs = log_softmax(fwd.logits.cast<double>());
  const CtcResult ctc = ctc_forward_backward(log_probs, utt.labels);
  if (!ctc.feasible) {
    throw DataError("utterance '" + utt.id + "' is CTC-infeasible; filter it at load time");
  }
  UtteranceGrad out;
  out.loss = ctc.neg_log_likelihood;
  out.hypothesis = greedy_decode(log_probs);
  out.grads = backward(params, model_cfg, fwd.cache, Mat<float>(ctc.dlogits.cast<float>()));
  return out;
}

void add_into(ModelParams& acc, const ModelParams& g) {
  auto dst = acc.tensors();
  const auto src = g.tensors();
  for (size_t i = 0; i < dst.size(); ++i) {
    for (Eigen::Index k = 0; k < dst[i].size(); ++k) dst[i].data[k] += src[i].data[k];
  }
}

void scale(ModelParams& p, float factor) {
  for (auto& view : p.tensors()) {
    for (Eigen::Index k = 0; k < view.size(); ++k) view.data[k] *= factor;
  }
}

std::string arch_name(bool bidirectional) { return bidirectional ? "BiLSTM" : "LSTM"; }

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw UsageError("train config: learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw UsageError("train config: momentum must be in [0, 1)");
  if (batch_size < 1) throw UsageError("train config: batch size must be >= 1");
  if (epochs < 0) throw UsageError("train config: epochs must be >= 0");
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) {
    throw UsageError("train config: dropout keep probability must be in (0, 1]");
  }
  double total = 0.0;
  for (double p : split) {
    if (!(p >= 0.0)) throw UsageError("train config: split fractions must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("train config: split must sum to 1");
  if (beam_width < 1) throw UsageError("train config: beam width must be >= 1");
}

std::array<std::vector<size_t>, 3> split_indices(size_t n, const std::array<double, 3>& split,
                                                 uint64_t seed) {
  if (n < 10) {
    throw DataError("dataset has " + std::to_string(n) + " rows; splitting needs at least 10");
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(mix_seed(seed, 0x5b17));
  rng.shuffle(order);
  // Small epsilon so 0.1 * 100 lands on 10, not 9.
  const auto n_val = static_cast<size_t>(std::floor(static_cast<double>(n) * split[1] + 1e-9));
  const auto n_test = static_cast<size_t>(std::floor(static_cast<double>(n) * split[2] + 1e-9));
  const size_t n_train = n - n_val - n_test;
  std::array<std::vector<size_t>, 3> out;
  out[0].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out[1].assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out[2].assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

double global_norm(const ModelParams& grads) {
  double sq = 0.0;
  for (const auto& view : grads.tensors()) {
    for (Eigen::Index k = 0; k < view.size(); ++k) {
      const double v = view.data[k];
      sq += v * v;
    }
  }
  return std::sqrt(sq);
}

StepOutcome momentum_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
                          const TrainConfig& cfg) {
  StepOutcome out;
  out.grad_norm = global_norm(grads);
  if (!std::isfinite(out.grad_norm)) {
    out.applied = false;
    out.event = "non-finite gradient; step skipped";
    return out;
  }
  double factor = 1.0;
  if (cfg.grad_clip_norm > 0.0 && out.grad_norm > cfg.grad_clip_norm) {
    factor = cfg.grad_clip_norm / out.grad_norm;
  }
  out.clipped_norm = out.grad_norm * factor;

  auto theta = params.tensors();
  auto velocity = state.velocity.tensors();
  const auto g = grads.tensors();
  if (theta.size() != g.size() || theta.size() != velocity.size()) {
    throw UsageError("momentum_step: parameter, gradient and state layouts differ");
  }
  const auto mu = static_cast<float>(cfg.momentum);
  const auto lr = static_cast<float>(cfg.learning_rate);
  const auto f = static_cast<float>(factor);
  for (size_t i = 0; i < theta.size(); ++i) {
    if (theta[i].size() != g[i].size() || theta[i].size() != velocity[i].size()) {
      throw UsageError("momentum_step: shape mismatch in '" + theta[i].name + "'");
    }
    for (Eigen::Index k = 0; k < theta[i].size(); ++k) {
      velocity[i].data[k] = mu * velocity[i].data[k] + f * g[i].data[k];
      theta[i].data[k] -= lr * velocity[i].data[k];
    }
  }
  return out;
}

EpochStats train_epoch(ModelParams& params, OptimizerState& state, const ModelConfig& model_cfg,
                       const std::vector<Utterance>& data, const TrainConfig& cfg, Rng& rng,
                       int threads, const LogFn& log) {
  if (data.empty()) throw UsageError("train_epoch: no training data");
  ModelConfig run_cfg = model_cfg;
  run_cfg.dropout_keep = cfg.dropout_keep;

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  rng.shuffle(order);

  std::vector<double> losses(data.size(), 0.0);
  std::vector<LabelSeq> hyps(data.size());
  EpochStats stats;
  const auto batch = static_cast<size_t>(cfg.batch_size);
  for (size_t start = 0; start < order.size(); start += batch) {
    const size_t count = std::min(batch, order.size() - start);
    std::vector<uint64_t> seeds(count);
    for (size_t b = 0; b < count; ++b) {
      seeds[b] = cfg.fixed_dropout_seed ? mix_seed(*cfg.fixed_dropout_seed, order[start + b])
                                        : rng.next();
    }
    std::vector<UtteranceGrad> results(count);
    parallel_for(count, threads, [&](size_t b) {
      results[b] = utterance_gradient(params, run_cfg, data[order[start + b]], seeds[b]);
    });
    ModelParams total = std::move(results[0].grads);
    for (size_t b = 1; b < count; ++b) add_into(total, results[b].grads);
    scale(total, 1.0f / static_cast<float>(count));
    for (size_t b = 0; b < count; ++b) {
      losses[order[start + b]] = results[b].loss;
      hyps[order[start + b]] = std::move(results[b].hypothesis);
    }
    const StepOutcome step = momentum_step(params, total, state, cfg);
    if (!step.applied) {
      ++stats.skipped_steps;
      if (log) log(step.event);
    }
  }

  // Sum in dataset order so the result is independent of the shuffle.
  std::vector<std::pair<LabelSeq, LabelSeq>> pairs;
  for (size_t i = 0; i < data.size(); ++i) {
    stats.cost_sum += losses[i];
    pairs.emplace_back(data[i].labels, std::move(hyps[i]));
  }
  stats.avg_cost = stats.cost_sum / static_cast<double>(data.size());
  stats.ler = corpus_ler(pairs);
  return stats;
}

LabelSeq decode_logits(const Mat<float>& logits, Decoder decoder, int beam_width) {
  const MatrixD log_probs = log_softmax(logits.cast<double>());
  return decoder == Decoder::kBeam ? beam_search_decode(log_probs, beam_width)
                                   : greedy_decode(log_probs);
}

EvalStats evaluate(const ModelParams& params, const ModelConfig& model_cfg,
                   const std::vector<Utterance>& data, Decoder decoder, int beam_width,
                   int threads) {
  if (data.empty()) throw UsageError("evaluate: no data");
  std::vector<double> losses(data.size());
  EvalStats stats;
  stats.hypotheses.resize(data.size());
  parallel_for(data.size(), threads, [&](size_t i) {
    const auto fwd = forward(params, model_cfg, data[i].features, false, 0);
    const MatrixD log_probs = log_softmax(fwd.logits.cast<double>());
    losses[i] = ctc_forward_backward(log_probs, data[i].labels).neg_log_likelihood;
    stats.hypotheses[i] = decoder == Decoder::kBeam ? beam_search_decode(log_probs, beam_width)
                                                    : greedy_decode(log_probs);
  });
  std::vector<std::pair<LabelSeq, LabelSeq>> pairs;
  double sum = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    sum += losses[i];
    pairs.emplace_back(data[i].labels, stats.hypotheses[i]);
  }
  stats.avg_cost = sum / static_cast<double>(data.size());
  stats.ler = corpus_ler(pairs);
  return stats;
}

TrainingRun train_model(ModelParams params, const ModelConfig& model_cfg,
                        const std::vector<Utterance>& train, const std::vector<Utterance>& val,
                        const TrainConfig& cfg, int threads, const LogFn& log,
                        const std::function<void(const MetricsRow&)>& on_epoch) {
  cfg.validate();
  TrainingRun run;
  OptimizerState state = OptimizerState::zeros_like(params);
  Rng rng(mix_seed(cfg.seed, 0x7a11));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const EpochStats st = train_epoch(params, state, model_cfg, train, cfg, rng, threads, log);
    MetricsRow row;
    row.epoch = epoch;
    row.train_cost = st.avg_cost;
    row.train_ler = st.ler;
    if (!val.empty()) {
      const EvalStats ev = evaluate(params, model_cfg, val, cfg.eval_decoder, cfg.beam_width, threads);
      row.val_cost = ev.avg_cost;
      row.val_ler = ev.ler;
    }
    run.history.push_back(row);
    run.epoch_cost_sums.push_back(st.cost_sum);
    if (on_epoch) on_epoch(row);
  }
  run.params = std::move(params);
  return run;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os.precision(9);
  os << "epoch,train_cost,train_ler,val_cost,val_ler\n";
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.train_cost << ',' << r.train_ler << ',' << r.val_cost << ','
       << r.val_ler << '\n';
  }
  return os.str();
}

bool ctc_feasible(size_t num_labels, Eigen::Index frames) {
  return static_cast<Eigen::Index>(2 * num_labels + 1) <= frames;
}

Mat<float> features_from_audio(const AudioClip& clip, const FeatureConfig& cfg, bool normalize) {
  const AudioClip at_rate = clip.sample_rate_hz == cfg.sample_rate_hz
                                ? clip
                                : resample(clip, cfg.sample_rate_hz);
  FeatureMatrix fm = mfcc(at_rate, cfg);
  if (normalize) fm = feature_normalize(fm);
  return fm.values.cast<float>();
}

std::vector<Utterance> load_utterances(const std::vector<ManifestRow>& rows,
                                       const Alphabet& alphabet, const LoadOptions& options,
                                       int threads, const LogFn& log) {
  std::vector<std::optional<Utterance>> slots(rows.size());
  parallel_for(rows.size(), threads, [&](size_t i) {
    const ManifestRow& row = rows[i];
    Utterance utt;
    utt.id = row.audio.empty() ? row.features : row.audio;
    utt.text = normalize_transcript(row.text, alphabet);
    utt.labels = encode(utt.text, alphabet);
    if (!row.features.empty()) {
      FeatureMatrix fm;
      fm.values = read_feature_cache(row.features);
      fm.config = options.features;
      if (fm.dim() != options.features.n_mfcc) {
        throw DataError(row.features + ": cached feature dim " + std::to_string(fm.dim()) +
                        " differs from configured " + std::to_string(options.features.n_mfcc));
      }
      if (options.normalize) fm = feature_normalize(fm);
      utt.features = fm.values.cast<float>();
    } else {
      utt.features = features_from_audio(load_wav(row.audio), options.features, options.normalize);
    }
    slots[i] = std::move(utt);
  });
  std::vector<Utterance> out;
  for (size_t i = 0; i < slots.size(); ++i) {
    Utterance& utt = *slots[i];
    if (!ctc_feasible(utt.labels.size(), utt.features.rows())) {
      if (log) {
        log("warning: dropping '" + utt.id + "': " + std::to_string(utt.labels.size()) +
            " labels need " + std::to_string(2 * utt.labels.size() + 1) + " frames, have " +
            std::to_string(utt.features.rows()));
      }
      continue;
    }
    out.push_back(std::move(utt));
  }
  return out;
}

double relative_improvement(double baseline, double transfer) {
  return baseline == 0.0 ? 0.0 : (baseline - transfer) / baseline;
}

std::string language_label(const std::string& alphabet_name) {
  if (alphabet_name == "ru") return "Russian";
  if (alphabet_name == "kk") return "Kazakh";
  return alphabet_name;
}

ExperimentResult run_experiment_matrix(const std::vector<Utterance>& data,
                                       const Alphabet& alphabet,
                                       const std::vector<Checkpoint>& sources,
                                       const ExperimentConfig& cfg, int threads,
                                       const LogFn& log) {
  cfg.train.validate();
  ExperimentResult result;
  const auto split = split_dataset(data, cfg.train.split, cfg.train.seed);
  result.train_size = split.train.size();
  result.val_size = split.val.size();
  result.test_size = split.test.size();
  if (split.train.empty()) throw DataError("experiment: training split is empty");
  const int feature_dim = static_cast<int>(split.train.front().features.cols());

  for (bool bidirectional : {false, true}) {
    ModelConfig model_cfg;
    model_cfg.hidden = cfg.hidden;
    model_cfg.bidirectional = bidirectional;
    model_cfg.dropout_keep = cfg.train.dropout_keep;
    model_cfg.feature_dim = feature_dim;
    model_cfg.num_classes = alphabet.num_classes();
    model_cfg.seed = cfg.train.seed;

    const Checkpoint* source = nullptr;
    for (const auto& s : sources) {
      if (s.config.bidirectional == bidirectional) {
        source = &s;
        break;
      }
    }

    for (bool transfer : {false, true}) {
      ScenarioResult sc;
      sc.bidirectional = bidirectional;
      sc.transfer = transfer;
      ModelParams init;
      if (transfer) {
        if (source == nullptr) {
          result.warnings.push_back("no " + arch_name(bidirectional) +
                                    " source checkpoint; skipping its transfer row");
          continue;
        }
        TransferResult tr = transfer_weights(*source, model_cfg, alphabet, cfg.train.seed);
        model_cfg = tr.config;
        init = std::move(tr.params);
        sc.name = arch_name(bidirectional) + " with " + language_label(source->alphabet_name) +
                  " model";
      } else {
        init = init_params(model_cfg);
        sc.name = arch_name(bidirectional);
      }
      if (log) log("training " + sc.name);
      TrainingRun run = train_model(std::move(init), model_cfg, split.train, split.val, cfg.train,
                                    threads, log);
      sc.history = std::move(run.history);
      if (!sc.history.empty()) sc.final_row = sc.history.back();
      sc.params = std::move(run.params);
      sc.config = model_cfg;
      result.scenarios.push_back(std::move(sc));
    }
  }

  for (bool bidirectional : {false, true}) {
    const ScenarioResult* base = nullptr;
    const ScenarioResult* tr = nullptr;
    for (const auto& sc : result.scenarios) {
      if (sc.bidirectional != bidirectional) continue;
      (sc.transfer ? tr : base) = &sc;
    }
    if (base == nullptr || tr == nullptr) continue;
    Improvement imp;
    imp.architecture = arch_name(bidirectional);
    imp.train_cost = relative_improvement(base->final_row.train_cost, tr->final_row.train_cost);
    imp.train_ler = relative_improvement(base->final_row.train_ler, tr->final_row.train_ler);
    imp.val_cost = relative_improvement(base->final_row.val_cost, tr->final_row.val_cost);
    imp.val_ler = relative_improvement(base->final_row.val_ler, tr->final_row.val_ler);
    result.improvements.push_back(imp);
  }
  return result;
}

}  // namespace ctcx
