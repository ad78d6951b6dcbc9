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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "checkpoint.hpp"
#include "ctc.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "synthetic.hpp"
#include "transfer.hpp"

namespace ctcx::commands {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void emit(const LogFn& log, const std::string& line) {
  if (log) log(line);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
  }
  fs::rename(tmp, path);
}

// Relative paths inside a manifest are taken relative to the manifest.
std::vector<ManifestRow> read_manifest_resolved(const std::string& path) {
  if (!fs::exists(path)) throw DataError("manifest not found: " + path);
  std::vector<ManifestRow> rows = read_manifest(path);
  const fs::path base = fs::path(path).parent_path();
  auto fix = [&base](std::string& p) {
    if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  for (ManifestRow& row : rows) {
    fix(row.audio);
    fix(row.features);
  }
  return rows;
}

std::string hex8(uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << (v & 0xFFFFFFFFu);
  return os.str();
}

json metrics_json(const MetricsRow& row) {
  return {{"epoch", row.epoch},
          {"train_cost", row.train_cost},
          {"train_ler", row.train_ler},
          {"val_cost", row.val_cost},
          {"val_ler", row.val_ler}};
}

std::string format_row(const MetricsRow& row) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "epoch " << row.epoch << "  train_cost "
     << row.train_cost << "  train_ler " << row.train_ler << "  val_cost " << row.val_cost
     << "  val_ler " << row.val_ler;
  return os.str();
}

std::vector<Mat<float>> random_probes(int count, int feature_dim, uint64_t seed) {
  Rng rng(mix_seed(seed, 0x9e0b));
  std::vector<Mat<float>> probes;
  for (int p = 0; p < count; ++p) {
    const int frames = 5 + static_cast<int>(rng.below(26));
    Mat<float> m(frames, feature_dim);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.normal());
    probes.push_back(std::move(m));
  }
  return probes;
}

Alphabet model_alphabet(const LoadedModel& model, const std::string& fallback) {
  if (!fallback.empty()) {
    Alphabet a = resolve_alphabet(fallback);
    if (a.num_classes() != model.config.num_classes) {
      throw DataError("alphabet '" + a.name() + "' has " + std::to_string(a.num_classes()) +
                      " classes, checkpoint expects " + std::to_string(model.config.num_classes));
    }
    return a;
  }
  if (model.alphabet) return *model.alphabet;
  return resolve_alphabet(model.alphabet_name);
}

void check_feature_dim(const std::vector<Utterance>& data, const ModelConfig& cfg) {
  for (const Utterance& u : data) {
    if (u.features.cols() != cfg.feature_dim) {
      throw DataError(u.id + ": feature dim " + std::to_string(u.features.cols()) +
                      " does not match model input " + std::to_string(cfg.feature_dim));
    }
  }
}

TrainConfig effective_train(TrainConfig cfg, bool strict_paper) {
  if (strict_paper) cfg.grad_clip_norm = 0.0;
  cfg.validate();
  return cfg;
}

std::string scenario_slug(const ScenarioResult& sc) {
  return std::string(sc.bidirectional ? "bilstm" : "lstm") + (sc.transfer ? "_transfer" : "_random");
}

}  // namespace

FeatureConfig feature_config_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("feature config must be a JSON object");
  FeatureConfig cfg;
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) {
      try {
        field = j.at(key).get<std::decay_t<decltype(field)>>();
      } catch (const json::exception&) {
        throw UsageError(std::string("feature config: bad value for '") + key + "'");
      }
    }
  };
  take("sample_rate_hz", cfg.sample_rate_hz);
  take("preemphasis", cfg.preemphasis);
  take("window_ms", cfg.window_ms);
  take("hop_ms", cfg.hop_ms);
  take("fft_size", cfg.fft_size);
  take("n_mels", cfg.n_mels);
  take("n_mfcc", cfg.n_mfcc);
  take("mel_fmin_hz", cfg.mel_fmin_hz);
  take("mel_fmax_hz", cfg.mel_fmax_hz);
  cfg.validate();
  return cfg;
}

json feature_config_to_json(const FeatureConfig& cfg) {
  return {{"sample_rate_hz", cfg.sample_rate_hz}, {"preemphasis", cfg.preemphasis},
          {"window_ms", cfg.window_ms},           {"hop_ms", cfg.hop_ms},
          {"fft_size", cfg.fft_size},             {"n_mels", cfg.n_mels},
          {"n_mfcc", cfg.n_mfcc},                 {"mel_fmin_hz", cfg.mel_fmin_hz},
          {"mel_fmax_hz", cfg.mel_fmax_hz}};
}

FeatureConfig load_feature_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open feature config " + path);
  try {
    return feature_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------- prepare

Result prepare(const PrepareOptions& opts, const LogFn& log) {
  if (opts.out.empty()) throw UsageError("prepare: --out is required");
  opts.features.validate();
  const Alphabet alphabet = resolve_alphabet(opts.alphabet);
  const fs::path out_path(opts.out);

  std::vector<ManifestRow> rows;
  if (opts.synthetic_count > 0) {
    SyntheticSpec spec;
    spec.count = opts.synthetic_count;
    spec.seed = opts.synthetic_seed;
    spec.prototype_seed = opts.prototype_seed;
    spec.feature_dim = opts.features.n_mfcc;
    const auto corpus = generate_synthetic(alphabet, spec);
    const fs::path feat_dir =
        fs::absolute(out_path).parent_path() / (out_path.stem().string() + "_features");
    fs::create_directories(feat_dir);
    for (size_t i = 0; i < corpus.size(); ++i) {
      std::ostringstream name;
      name << "syn_" << std::setw(5) << std::setfill('0') << i << ".mfcc";
      const fs::path cache = feat_dir / name.str();
      write_feature_cache(corpus[i].features, cache.string());
      ManifestRow row;
      row.text = corpus[i].text;
      row.duration_s = static_cast<double>(corpus[i].features.rows()) * opts.features.hop_ms / 1000.0;
      row.features = cache.string();
      rows.push_back(std::move(row));
    }
    emit(log, "generated " + std::to_string(rows.size()) + " synthetic utterances in " +
                  feat_dir.string());
  } else {
    if (opts.manifest.empty()) throw UsageError("prepare: --manifest or --synthetic is required");
    rows = read_manifest_resolved(opts.manifest);
  }

  Result result;
  if (rows.empty()) {
    result.exit_code = 2;
    result.diagnostic = "prepare: manifest is empty";
    result.report = {{"kept", 0}, {"dropped", json::object()}, {"dropped_rows", json::array()}};
    return result;
  }

  std::vector<ManifestRow> kept;
  std::map<std::string, int> dropped;
  json dropped_rows = json::array();
  auto drop = [&](size_t i, const ManifestRow& row, const std::string& reason,
                  const std::string& detail) {
    ++dropped[reason];
    json entry = {{"row", i}, {"reason", reason}, {"text", row.text}};
    if (!row.audio.empty()) entry["audio"] = row.audio;
    if (!detail.empty()) entry["detail"] = detail;
    dropped_rows.push_back(entry);
    emit(log, "dropped row " + std::to_string(i) + " (" + reason + ")" +
                  (detail.empty() ? "" : ": " + detail));
  };

  for (size_t i = 0; i < rows.size(); ++i) {
    ManifestRow row = rows[i];
    row.text = normalize_transcript(row.text, alphabet);
    if (row.duration_s && *row.duration_s > kMaxUtteranceSeconds) {
      drop(i, row, "duration", "");
      continue;
    }
    int64_t frames = 0;
    try {
      if (!row.features.empty()) {
        frames = read_feature_cache_shape(row.features).first;
      } else {
        const AudioClip clip = load_wav(row.audio);
        if (!row.duration_s) row.duration_s = clip.duration_s();
        const auto n = static_cast<int64_t>(std::llround(
            static_cast<double>(clip.samples.size()) * opts.features.sample_rate_hz /
            clip.sample_rate_hz));
        frames = frame_count(n, opts.features);
      }
    } catch (const DataError& e) {
      drop(i, row, "audio_unreadable", e.what());
      continue;
    }
    if (!row.duration_s) {
      drop(i, row, "missing_duration", "");
      continue;
    }
    if (*row.duration_s > kMaxUtteranceSeconds) {
      drop(i, row, "duration", "");
      continue;
    }
    if (row.text.empty()) {
      drop(i, row, "empty_transcript", "");
      continue;
    }
    const size_t labels = utf8_decode(row.text).size();
    if (!ctc_feasible(labels, frames)) {
      drop(i, row, "ctc_infeasible",
           std::to_string(labels) + " labels, " + std::to_string(frames) + " frames");
      continue;
    }
    kept.push_back(std::move(row));
  }

  result.report = {{"kept", kept.size()},
                   {"total", rows.size()},
                   {"dropped", dropped},
                   {"dropped_rows", dropped_rows},
                   {"out", opts.out}};
  if (kept.empty()) {
    result.exit_code = 2;
    result.diagnostic = "prepare: all " + std::to_string(rows.size()) + " rows were dropped";
    return result;
  }
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_manifest(kept, opts.out);
  return result;
}

// --------------------------------------------------------------- features

Result features(const FeaturesOptions& opts, const LogFn& log) {
  if (opts.out_dir.empty()) throw UsageError("features: --out-dir is required");
  opts.features.validate();
  const std::vector<ManifestRow> rows = read_manifest_resolved(opts.manifest);
  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);

  // A config change invalidates every cache in the directory.
  const fs::path config_path = out_dir / "features.json";
  const json config_json = feature_config_to_json(opts.features);
  bool config_matches = false;
  if (fs::exists(config_path)) {
    std::ifstream in(config_path);
    try {
      config_matches = json::parse(in) == config_json;
    } catch (const json::exception&) {
      config_matches = false;
    }
  }

  struct Slot {
    enum class State { kWritten, kSkipped, kFailed } state = State::kFailed;
    ManifestRow row;
    std::string error;
  };
  std::vector<Slot> slots(rows.size());
  parallel_for(rows.size(), worker_threads(), [&](size_t i) {
    Slot& slot = slots[i];
    slot.row = rows[i];
    try {
      if (slot.row.audio.empty()) {
        if (slot.row.features.empty()) throw DataError("row has neither audio nor features");
        read_feature_cache_shape(slot.row.features);
        slot.state = Slot::State::kSkipped;
        return;
      }
      const fs::path audio(slot.row.audio);
      const fs::path cache =
          out_dir / (audio.stem().string() + "-" + hex8(hash64(audio.string(), 0)) + ".mfcc");
      slot.row.features = cache.string();
      if (config_matches && fs::exists(cache) && fs::exists(audio) &&
          fs::last_write_time(cache) >= fs::last_write_time(audio)) {
        const auto shape = read_feature_cache_shape(cache.string());
        if (static_cast<int>(shape.second) == opts.features.n_mfcc) {
          slot.state = Slot::State::kSkipped;
          return;
        }
      }
      AudioClip clip = load_wav(slot.row.audio);
      if (clip.sample_rate_hz != opts.features.sample_rate_hz) {
        clip = resample(clip, opts.features.sample_rate_hz);
      }
      const FeatureMatrix fm = mfcc(clip, opts.features);
      write_feature_cache(fm.values, cache.string());
      slot.state = Slot::State::kWritten;
    } catch (const Error& e) {
      slot.error = e.what();
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  });

  int written = 0;
  int skipped = 0;
  json failed = json::array();
  std::vector<ManifestRow> out_rows;
  for (const Slot& slot : slots) {
    switch (slot.state) {
      case Slot::State::kWritten:
        ++written;
        out_rows.push_back(slot.row);
        break;
      case Slot::State::kSkipped:
        ++skipped;
        out_rows.push_back(slot.row);
        break;
      case Slot::State::kFailed:
        failed.push_back({{"audio", slot.row.audio}, {"error", slot.error}});
        emit(log, "failed: " + slot.row.audio + ": " + slot.error);
        break;
    }
  }
  write_text(config_path, config_json.dump(2) + "\n");
  const fs::path manifest_out = out_dir / "manifest.jsonl";
  write_manifest(out_rows, manifest_out.string());
  emit(log, "skipped " + std::to_string(skipped) + " cached");

  Result result;
  result.report = {{"written", written},
                   {"skipped", skipped},
                   {"failed", failed},
                   {"manifest", manifest_out.string()}};
  if (!failed.empty()) {
    result.exit_code = 2;
    result.diagnostic = "features: " + std::to_string(failed.size()) + " file(s) failed";
  }
  return result;
}

// ------------------------------------------------------------------ train

Result train(const TrainOptions& opts, const LogFn& log) {
  if (opts.transfer_init && opts.source_checkpoint.empty()) {
    throw UsageError("train: --init transfer requires --source-checkpoint");
  }
  if (opts.out_dir.empty()) throw UsageError("train: --out is required");
  if (opts.hidden < 1) throw UsageError("train: --hidden must be positive");
  const TrainConfig tcfg = effective_train(opts.train, opts.strict_paper);
  opts.features.validate();
  const Alphabet alphabet = resolve_alphabet(opts.alphabet);

  // Load the source before any expensive work so incompatibility fails fast.
  std::optional<Checkpoint> source;
  if (opts.transfer_init) source = read_checkpoint(opts.source_checkpoint);

  const int threads = worker_threads();
  const auto rows = read_manifest_resolved(opts.manifest);
  const auto data = load_utterances(rows, alphabet, {opts.features, true}, threads, log);
  if (data.empty()) throw DataError("train: no usable utterances in " + opts.manifest);
  const auto split = split_dataset(data, tcfg.split, tcfg.seed);

  ModelConfig mcfg;
  mcfg.hidden = opts.hidden;
  mcfg.bidirectional = opts.bidirectional;
  mcfg.dropout_keep = tcfg.dropout_keep;
  mcfg.feature_dim = static_cast<int>(data.front().features.cols());
  mcfg.num_classes = alphabet.num_classes();
  mcfg.seed = tcfg.seed;
  mcfg.validate();

  ModelParams init;
  json transfer_json;
  if (source) {
    TransferResult tr = transfer_weights(*source, mcfg, alphabet, tcfg.seed);
    const ModelParams src = params_from_checkpoint(*source);
    const VerifyReport vr =
        verify_transfer(src, tr.params, tr.config, random_probes(8, mcfg.feature_dim, tcfg.seed));
    transfer_json = {{"source", opts.source_checkpoint},
                     {"copied", tr.report.copied},
                     {"reinitialized", tr.report.reinitialized},
                     {"max_abs_deviation", vr.max_abs_deviation}};
    mcfg = tr.config;
    init = std::move(tr.params);
    emit(log, "initialized from " + opts.source_checkpoint + " (" +
                  std::to_string(tr.report.copied.size()) + " tensors copied)");
  } else {
    init = init_params(mcfg);
  }
  check_feature_dim(data, mcfg);

  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);
  TrainingRun run = train_model(std::move(init), mcfg, split.train, split.val, tcfg, threads, log,
                                [&log](const MetricsRow& row) { emit(log, format_row(row)); });

  const fs::path csv = out_dir / "metrics.csv";
  const fs::path ckpt = out_dir / "model.ctcx";
  write_text(csv, metrics_csv(run.history));
  save_checkpoint(run.params, mcfg, alphabet, ckpt.string());

  json report = {{"arch", opts.bidirectional ? "bilstm" : "lstm"},
                 {"init", opts.transfer_init ? "transfer" : "random"},
                 {"alphabet", alphabet.name()},
                 {"epochs", tcfg.epochs},
                 {"train_size", split.train.size()},
                 {"val_size", split.val.size()},
                 {"test_size", split.test.size()},
                 {"grad_clip_norm", tcfg.grad_clip_norm},
                 {"metrics_csv", csv.string()},
                 {"checkpoint", ckpt.string()}};
  if (!run.history.empty()) report["final"] = metrics_json(run.history.back());
  if (!run.epoch_cost_sums.empty()) report["final_train_cost_sum"] = run.epoch_cost_sums.back();
  if (!split.test.empty()) {
    const EvalStats test =
        evaluate(run.params, mcfg, split.test, tcfg.eval_decoder, tcfg.beam_width, threads);
    report["test"] = {{"cost", test.avg_cost}, {"ler", test.ler}};
  }
  if (!transfer_json.is_null()) report["transfer"] = transfer_json;
  write_text(out_dir / "summary.json", report.dump(2) + "\n");
  return {0, report, ""};
}

// --------------------------------------------------------------- transfer

Result transfer(const TransferOptions& opts, const LogFn& log) {
  if (opts.out.empty()) throw UsageError("transfer: --out is required");
  if (opts.probes < 1) throw UsageError("transfer: --probes must be positive");
  const Alphabet alphabet = resolve_alphabet(opts.target_alphabet);
  const Checkpoint source = read_checkpoint(opts.source);

  ModelConfig target_cfg = source.config;
  target_cfg.num_classes = alphabet.num_classes();
  TransferResult tr = transfer_weights(source, target_cfg, alphabet, opts.seed);
  const ModelParams src = params_from_checkpoint(source);
  const VerifyReport vr = verify_transfer(
      src, tr.params, tr.config, random_probes(opts.probes, tr.config.feature_dim, opts.seed));
  save_checkpoint(tr.params, tr.config, alphabet, opts.out);

  json report = {{"source", opts.source},
                 {"out", opts.out},
                 {"source_alphabet", tr.report.source_alphabet},
                 {"target_alphabet", tr.report.target_alphabet},
                 {"source_classes", tr.report.source_classes},
                 {"target_classes", tr.report.target_classes},
                 {"copied", tr.report.copied},
                 {"reinitialized", tr.report.reinitialized},
                 {"skipped_reason", tr.report.skipped_reason},
                 {"verify",
                  {{"probes", opts.probes},
                   {"max_abs_deviation", vr.max_abs_deviation},
                   {"layer_deviation", vr.layer_deviation},
                   {"identical", vr.identical()}}}};
  const std::string report_path =
      opts.report_path.empty() ? opts.out + ".report.json" : opts.report_path;
  write_text(report_path, report.dump(2) + "\n");
  report["report"] = report_path;
  emit(log, "copied " + std::to_string(tr.report.copied.size()) + ", reinitialized " +
                std::to_string(tr.report.reinitialized.size()));
  return {0, report, ""};
}

// --------------------------------------------------------------- evaluate

Result evaluate(const EvaluateOptions& opts, const LogFn& log) {
  if (opts.beam_width < 1) throw UsageError("evaluate: --beam-width must be at least 1");
  opts.features.validate();
  const LoadedModel model = load_checkpoint(opts.checkpoint);
  const Alphabet alphabet = model_alphabet(model, opts.alphabet);
  const int threads = worker_threads();
  const auto rows = read_manifest_resolved(opts.manifest);
  const auto data = load_utterances(rows, alphabet, {opts.features, true}, threads, log);
  if (data.empty()) throw DataError("evaluate: no usable utterances in " + opts.manifest);
  check_feature_dim(data, model.config);

  const EvalStats stats =
      evaluate(model.params, model.config, data, opts.decoder, opts.beam_width, threads);
  json hyps = json::array();
  for (size_t i = 0; i < data.size(); ++i) {
    hyps.push_back({{"id", data[i].id},
                    {"reference", data[i].text},
                    {"hypothesis", decode(stats.hypotheses[i], alphabet)}});
  }
  json report = {{"checkpoint", opts.checkpoint},
                 {"utterances", data.size()},
                 {"decoder", opts.decoder == Decoder::kBeam ? "beam" : "greedy"},
                 {"beam_width", opts.beam_width},
                 {"avg_cost", stats.avg_cost},
                 {"ler", stats.ler},
                 {"hypotheses", hyps}};
  return {0, report, ""};
}

// ----------------------------------------------------------------- decode

Result decode(const DecodeOptions& opts, const LogFn& log) {
  if (opts.beam_width < 1) throw UsageError("decode: --beam-width must be at least 1");
  opts.features.validate();
  if (!fs::exists(opts.wav)) throw DataError("decode: no such file: " + opts.wav);
  const LoadedModel model = load_checkpoint(opts.checkpoint);
  const Alphabet alphabet = model_alphabet(model, opts.alphabet);
  const AudioClip clip = load_wav(opts.wav);
  const bool resampled = clip.sample_rate_hz != opts.features.sample_rate_hz;
  if (resampled) {
    emit(log, "notice: resampling " + std::to_string(clip.sample_rate_hz) + " Hz to " +
                  std::to_string(opts.features.sample_rate_hz) + " Hz");
  }
  const Mat<float> feats = features_from_audio(clip, opts.features, true);
  if (feats.cols() != model.config.feature_dim) {
    throw DataError("decode: feature dim " + std::to_string(feats.cols()) +
                    " does not match model input " + std::to_string(model.config.feature_dim));
  }
  const auto fr = forward(model.params, model.config, feats, false, 0);
  const LabelSeq labels = decode_logits(fr.logits, opts.decoder, opts.beam_width);
  json report = {{"wav", opts.wav},
                 {"transcript", decode(labels, alphabet)},
                 {"frames", feats.rows()},
                 {"sample_rate_hz", clip.sample_rate_hz},
                 {"resampled", resampled}};
  return {0, report, ""};
}

// ------------------------------------------------------------- experiment

Result experiment(const ExperimentOptions& opts, const LogFn& log) {
  if (opts.out_dir.empty()) throw UsageError("experiment: --out is required");
  if (opts.hidden < 1) throw UsageError("experiment: --hidden must be positive");
  const TrainConfig tcfg = effective_train(opts.train, opts.strict_paper);
  opts.features.validate();
  const Alphabet alphabet = resolve_alphabet(opts.alphabet);

  std::vector<Checkpoint> sources;
  for (const std::string& path : opts.source_checkpoints) sources.push_back(read_checkpoint(path));

  const int threads = worker_threads();
  const auto rows = read_manifest_resolved(opts.manifest);
  const auto data = load_utterances(rows, alphabet, {opts.features, true}, threads, log);
  if (data.empty()) throw DataError("experiment: no usable utterances in " + opts.manifest);

  const ExperimentResult er =
      run_experiment_matrix(data, alphabet, sources, {tcfg, opts.hidden}, threads, log);
  for (const std::string& w : er.warnings) emit(log, "warning: " + w);

  const fs::path out_dir(opts.out_dir);
  fs::create_directories(out_dir);
  json scenarios = json::array();
  for (const ScenarioResult& sc : er.scenarios) {
    const fs::path csv = out_dir / ("metrics_" + scenario_slug(sc) + ".csv");
    write_text(csv, metrics_csv(sc.history));
    json row = metrics_json(sc.final_row);
    row["name"] = sc.name;
    row["arch"] = sc.bidirectional ? "bilstm" : "lstm";
    row["init"] = sc.transfer ? "transfer" : "random";
    row["epochs"] = sc.history.size();
    row["metrics_csv"] = csv.string();
    scenarios.push_back(row);
  }
  json improvements = json::array();
  for (const Improvement& imp : er.improvements) {
    improvements.push_back({{"architecture", imp.architecture},
                            {"train_cost", imp.train_cost},
                            {"train_ler", imp.train_ler},
                            {"val_cost", imp.val_cost},
                            {"val_ler", imp.val_ler}});
  }
  json report = {{"alphabet", alphabet.name()},
                 {"seed", tcfg.seed},
                 {"train_size", er.train_size},
                 {"val_size", er.val_size},
                 {"test_size", er.test_size},
                 {"scenarios", scenarios},
                 {"improvements", improvements},
                 {"warnings", er.warnings}};
  write_text(out_dir / "summary.json", report.dump(2) + "\n");
  return {0, report, ""};
}

std::string format_experiment_table(const json& report) {
  std::ostringstream os;
  os << std::left << std::setw(28) << "RNN type" << std::right << std::setw(15) << "Training cost"
     << std::setw(14) << "Training LER" << std::setw(17) << "Validation cost" << std::setw(16)
     << "Validation LER" << std::setw(8) << "Epochs" << '\n';
  os << std::fixed;
  for (const json& row : report.at("scenarios")) {
    os << std::left << std::setw(28) << row.at("name").get<std::string>() << std::right
       << std::setprecision(3) << std::setw(15) << row.at("train_cost").get<double>()
       << std::setw(14) << row.at("train_ler").get<double>() << std::setw(17)
       << row.at("val_cost").get<double>() << std::setw(16) << row.at("val_ler").get<double>()
       << std::setw(8) << row.at("epochs").get<int>() << '\n';
  }
  for (const json& imp : report.at("improvements")) {
    os << std::setprecision(1) << "Transfer improvement (" << imp.at("architecture").get<std::string>()
       << "): training cost " << 100.0 * imp.at("train_cost").get<double>() << "%, training LER "
       << 100.0 * imp.at("train_ler").get<double>() << "%, validation cost "
       << 100.0 * imp.at("val_cost").get<double>() << "%, validation LER "
       << 100.0 * imp.at("val_ler").get<double>() << "%\n";
  }
  for (const json& w : report.at("warnings")) os << "warning: " << w.get<std::string>() << '\n';
  return os.str();
}

}  // namespace ctcx::commands
