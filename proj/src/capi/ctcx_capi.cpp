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

#include "ctcx.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <new>
#include <string>

#include <json.hpp>

#include "checkpoint.hpp"
#include "commands.hpp"
#include "error.hpp"
#include "trainer.hpp"
#include "transfer.hpp"

struct ctcx_alphabet {
  ctcx::Alphabet value;
};

struct ctcx_model {
  ctcx::LoadedModel value;
  ctcx::Alphabet alphabet;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mutex;
ctcx_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

ctcx::LogFn current_logger() {
  std::lock_guard lock(g_log_mutex);
  if (g_log_fn == nullptr) return {};
  ctcx_log_fn fn = g_log_fn;
  void* user = g_log_user;
  // Commands log from worker threads too; serialize delivery.
  return [fn, user](const std::string& line) {
    std::lock_guard inner(g_log_mutex);
    fn(line.c_str(), user);
  };
}

ctcx_status fail(ctcx_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
ctcx_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const ctcx::Error& e) {
    switch (e.kind()) {
      case ctcx::ErrorKind::kUsage:
        return fail(CTCX_ERROR_USAGE, e.what());
      case ctcx::ErrorKind::kData:
        return fail(CTCX_ERROR_DATA, e.what());
      case ctcx::ErrorKind::kRuntime:
        return fail(CTCX_ERROR_RUNTIME, e.what());
    }
    return fail(CTCX_ERROR_RUNTIME, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(CTCX_ERROR_DATA, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CTCX_ERROR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(CTCX_ERROR_RUNTIME, e.what());
  } catch (...) {
    return fail(CTCX_ERROR_RUNTIME, "unknown error");
  }
}

std::string str(const char* s) { return s == nullptr ? std::string() : std::string(s); }

void require(const void* p, const char* what) {
  if (p == nullptr) throw ctcx::UsageError(std::string(what) + " must not be NULL");
}

ctcx::FeatureConfig to_cpp(const ctcx_feature_config& c) {
  ctcx::FeatureConfig f;
  f.sample_rate_hz = c.sample_rate_hz;
  f.preemphasis = c.preemphasis;
  f.window_ms = c.window_ms;
  f.hop_ms = c.hop_ms;
  f.fft_size = c.fft_size;
  f.n_mels = c.n_mels;
  f.n_mfcc = c.n_mfcc;
  f.mel_fmin_hz = c.mel_fmin_hz;
  f.mel_fmax_hz = c.mel_fmax_hz;
  return f;
}

void from_cpp(const ctcx::FeatureConfig& f, ctcx_feature_config* c) {
  c->sample_rate_hz = f.sample_rate_hz;
  c->preemphasis = f.preemphasis;
  c->window_ms = f.window_ms;
  c->hop_ms = f.hop_ms;
  c->fft_size = f.fft_size;
  c->n_mels = f.n_mels;
  c->n_mfcc = f.n_mfcc;
  c->mel_fmin_hz = f.mel_fmin_hz;
  c->mel_fmax_hz = f.mel_fmax_hz;
}

ctcx::Decoder to_cpp(ctcx_decoder d) {
  switch (d) {
    case CTCX_DECODER_GREEDY:
      return ctcx::Decoder::kGreedy;
    case CTCX_DECODER_BEAM:
      return ctcx::Decoder::kBeam;
  }
  throw ctcx::UsageError("unknown decoder " + std::to_string(static_cast<int>(d)));
}

ctcx::TrainConfig to_cpp(const ctcx_train_config& c) {
  ctcx::TrainConfig t;
  t.learning_rate = c.learning_rate;
  t.momentum = c.momentum;
  t.batch_size = c.batch_size;
  t.epochs = c.epochs;
  t.dropout_keep = c.dropout_keep;
  t.split = {c.split[0], c.split[1], c.split[2]};
  t.grad_clip_norm = c.grad_clip_norm;
  t.seed = c.seed;
  t.eval_decoder = to_cpp(c.eval_decoder);
  t.beam_width = c.beam_width;
  if (c.use_fixed_dropout_seed != 0) t.fixed_dropout_seed = c.fixed_dropout_seed;
  return t;
}

// Runs a command, hands out its report and maps its exit code.
ctcx_status finish(const ctcx::commands::Result& r, char** report) {
  if (report != nullptr) *report = r.report.is_null() ? nullptr : dup_string(r.report.dump());
  if (r.exit_code == 0) return CTCX_OK;
  g_last_error = r.diagnostic;
  switch (r.exit_code) {
    case 1:
      return CTCX_ERROR_USAGE;
    case 2:
      return CTCX_ERROR_DATA;
    default:
      return CTCX_ERROR_RUNTIME;
  }
}

template <typename Fn>
ctcx_status run_command(char** report, Fn&& fn) {
  if (report != nullptr) *report = nullptr;
  return guarded([&] { return finish(fn(current_logger()), report); });
}

}  // namespace

extern "C" {

const char* ctcx_version(void) { return "0.1.0"; }

const char* ctcx_last_error(void) { return g_last_error.c_str(); }

void ctcx_string_free(char* s) { std::free(s); }

void ctcx_set_log_callback(ctcx_log_fn fn, void* user_data) {
  std::lock_guard lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user_data;
}

ctcx_status ctcx_alphabet_open(const char* name_or_path, ctcx_alphabet** out) {
  return guarded([&] {
    require(name_or_path, "name_or_path");
    require(out, "out");
    *out = new ctcx_alphabet{ctcx::resolve_alphabet(name_or_path)};
    return CTCX_OK;
  });
}

void ctcx_alphabet_free(ctcx_alphabet* alphabet) { delete alphabet; }

int32_t ctcx_alphabet_size(const ctcx_alphabet* alphabet) {
  return alphabet == nullptr ? 0 : alphabet->value.size();
}

ctcx_status ctcx_alphabet_normalize(const ctcx_alphabet* alphabet, const char* text, char** out) {
  return guarded([&] {
    require(alphabet, "alphabet");
    require(text, "text");
    require(out, "out");
    *out = dup_string(ctcx::normalize_transcript(text, alphabet->value));
    return CTCX_OK;
  });
}

ctcx_status ctcx_alphabet_encode(const ctcx_alphabet* alphabet, const char* text, int32_t* labels,
                                 size_t capacity, size_t* length) {
  return guarded([&] {
    require(alphabet, "alphabet");
    require(text, "text");
    require(length, "length");
    if (labels == nullptr && capacity > 0) throw ctcx::UsageError("labels must not be NULL");
    const ctcx::LabelSeq seq = ctcx::encode(text, alphabet->value);
    *length = seq.size();
    for (size_t i = 0; i < seq.size() && i < capacity; ++i) labels[i] = seq[i];
    return CTCX_OK;
  });
}

ctcx_status ctcx_alphabet_decode(const ctcx_alphabet* alphabet, const int32_t* labels,
                                 size_t length, char** out) {
  return guarded([&] {
    require(alphabet, "alphabet");
    require(out, "out");
    if (labels == nullptr && length > 0) throw ctcx::UsageError("labels must not be NULL");
    const ctcx::LabelSeq seq(labels, labels + length);
    *out = dup_string(ctcx::decode(seq, alphabet->value));
    return CTCX_OK;
  });
}

ctcx_status ctcx_model_load(const char* path, ctcx_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    ctcx::LoadedModel loaded = ctcx::load_checkpoint(path);
    ctcx::Alphabet alphabet =
        loaded.alphabet ? *loaded.alphabet : ctcx::resolve_alphabet(loaded.alphabet_name);
    *out = new ctcx_model{std::move(loaded), std::move(alphabet)};
    return CTCX_OK;
  });
}

void ctcx_model_free(ctcx_model* model) { delete model; }

ctcx_status ctcx_model_info(const ctcx_model* model, char** json) {
  return guarded([&] {
    require(model, "model");
    require(json, "json");
    const ctcx::ModelConfig& cfg = model->value.config;
    nlohmann::json info = {{"hidden", cfg.hidden},
                           {"num_layers", cfg.num_layers},
                           {"bidirectional", cfg.bidirectional},
                           {"feature_dim", cfg.feature_dim},
                           {"num_classes", cfg.num_classes},
                           {"alphabet", model->alphabet.name()},
                           {"tensors", ctcx::tensor_names(cfg)}};
    *json = dup_string(info.dump());
    return CTCX_OK;
  });
}

ctcx_status ctcx_model_logits(const ctcx_model* model, const float* features, size_t frames,
                              size_t feature_dim, float* logits) {
  return guarded([&] {
    require(model, "model");
    require(features, "features");
    require(logits, "logits");
    const ctcx::ModelConfig& cfg = model->value.config;
    if (feature_dim != static_cast<size_t>(cfg.feature_dim)) {
      throw ctcx::DataError("feature_dim " + std::to_string(feature_dim) + " != model input " +
                            std::to_string(cfg.feature_dim));
    }
    if (frames == 0) throw ctcx::DataError("no frames");
    const ctcx::Mat<float> x = Eigen::Map<const ctcx::Mat<float>>(
        features, static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(feature_dim));
    const auto result = ctcx::forward(model->value.params, cfg, x, false, 0);
    std::memcpy(logits, result.logits.data(), sizeof(float) * result.logits.size());
    return CTCX_OK;
  });
}

ctcx_status ctcx_model_transcribe(const ctcx_model* model, const char* wav_path,
                                  ctcx_decoder decoder, int beam_width, char** transcript) {
  return guarded([&] {
    require(model, "model");
    require(wav_path, "wav_path");
    require(transcript, "transcript");
    if (beam_width < 1) throw ctcx::UsageError("beam_width must be at least 1");
    const ctcx::AudioClip clip = ctcx::load_wav(wav_path);
    const ctcx::Mat<float> feats = ctcx::features_from_audio(clip, ctcx::FeatureConfig{}, true);
    if (feats.cols() != model->value.config.feature_dim) {
      throw ctcx::DataError("feature dim mismatch with model input");
    }
    const auto result = ctcx::forward(model->value.params, model->value.config, feats, false, 0);
    const ctcx::LabelSeq labels = ctcx::decode_logits(result.logits, to_cpp(decoder), beam_width);
    *transcript = dup_string(ctcx::decode(labels, model->alphabet));
    return CTCX_OK;
  });
}

void ctcx_feature_config_init(ctcx_feature_config* cfg) {
  if (cfg != nullptr) from_cpp(ctcx::FeatureConfig{}, cfg);
}

ctcx_status ctcx_feature_config_load(const char* path, ctcx_feature_config* cfg) {
  return guarded([&] {
    require(path, "path");
    require(cfg, "cfg");
    from_cpp(ctcx::commands::load_feature_config(path), cfg);
    return CTCX_OK;
  });
}

void ctcx_train_config_init(ctcx_train_config* cfg) {
  if (cfg == nullptr) return;
  const ctcx::TrainConfig t;
  cfg->learning_rate = t.learning_rate;
  cfg->momentum = t.momentum;
  cfg->batch_size = t.batch_size;
  cfg->epochs = t.epochs;
  cfg->dropout_keep = t.dropout_keep;
  for (int i = 0; i < 3; ++i) cfg->split[i] = t.split[static_cast<size_t>(i)];
  cfg->grad_clip_norm = t.grad_clip_norm;
  cfg->seed = t.seed;
  cfg->eval_decoder = CTCX_DECODER_GREEDY;
  cfg->beam_width = t.beam_width;
  cfg->use_fixed_dropout_seed = 0;
  cfg->fixed_dropout_seed = 0;
}

void ctcx_prepare_options_init(ctcx_prepare_options* opts) {
  if (opts == nullptr) return;
  const ctcx::commands::PrepareOptions d;
  opts->manifest = nullptr;
  opts->alphabet = "kk";
  opts->out = nullptr;
  opts->synthetic_count = 0;
  opts->synthetic_seed = d.synthetic_seed;
  opts->prototype_seed = d.prototype_seed;
  ctcx_feature_config_init(&opts->features);
}

ctcx_status ctcx_prepare(const ctcx_prepare_options* opts, char** report) {
  return run_command(report, [&](const ctcx::LogFn& log) {
    require(opts, "opts");
    ctcx::commands::PrepareOptions o;
    o.manifest = str(opts->manifest);
    o.alphabet = str(opts->alphabet);
    o.out = str(opts->out);
    o.synthetic_count = opts->synthetic_count;
    o.synthetic_seed = opts->synthetic_seed;
    o.prototype_seed = opts->prototype_seed;
    o.features = to_cpp(opts->features);
    return ctcx::commands::prepare(o, log);
  });
}

void ctcx_features_options_init(ctcx_features_options* opts) {
  if (opts == nullptr) return;
  opts->manifest = nullptr;
  opts->out_dir = nullptr;
  ctcx_feature_config_init(&opts->features);
}

ctcx_status ctcx_features(const ctcx_features_options* opts, char** report) {
  return run_command(report, [&](const ctcx::LogFn& log) {
    require(opts, "opts");
    ctcx::commands::FeaturesOptions o;
    o.manifest = str(opts->manifest);
    o.out_dir = str(opts->out_dir);
    o.features = to_cpp(opts->features);
    return ctcx::commands::features(o, log);
  });
}

void ctcx_train_options_init(ctcx_train_options* opts) {
  if (opts == nullptr) return;
  opts->manifest = nullptr;
  opts->alphabet = "kk";
  opts->bidirectional = 0;
  opts->transfer_init = 0;
  opts->source_checkpoint = nullptr;
  opts->out_dir = nullptr;
  opts->hidden = 128;
  opts->strict_paper = 0;
  ctcx_train_config_init(&opts->train);
  ctcx_feature_config_init(&opts->features);
}

ctcx_status ctcx_train(const ctcx_train_options* opts, char** report) {
  return run_command(report, [&](const ctcx::LogFn& log) {
    require(opts, "opts");
    ctcx::commands::TrainOptions o;
    o.manifest = str(opts->manifest);
    o.alphabet = str(opts->alphabet);
    o.bidirectional = opts->bidirectional != 0;
    o.transfer_init = opts->transfer_init != 0;
    o.source_checkpoint = str(opts->source_checkpoint);
    o.out_dir = str(opts->out_dir);
    o.hidden = opts->hidden;
    o.strict_paper = opts->strict_paper != 0;
    o.train = to_cpp(opts->train);
    o.features = to_cpp(opts->features);
    return ctcx::commands::train(o, log);
  });
}

void ctcx_transfer_options_init(ctcx_transfer_options* opts) {
  if (opts == nullptr) return;
  opts->source = nullptr;
  opts->target_alphabet = nullptr;
  opts->out = nullptr;
  opts->report_path = nullptr;
  opts->seed = 0;
  opts->probes = ctcx::commands::TransferOptions{}.probes;
}

ctcx_status ctcx_transfer(const ctcx_transfer_options* opts, char** report) {
  return run_command(report, [&](const ctcx::LogFn& log) {
    require(opts, "opts");
    ctcx::commands::TransferOptions o;
    o.source = str(opts->source);
    o.target_alphabet = str(opts->target_alphabet);
    o.out = str(opts->out);
    o.report_path = str(opts->report_path);
    o.seed = opts->seed;
    o.probes = opts->probes;
    if (o.target_alphabet.empty()) throw ctcx::UsageError("transfer: target alphabet is required");
    // Precondition failures on the transfer itself are data errors.
    try {
      return ctcx::commands::transfer(o, log);
    } catch (const ctcx::TransferVerificationError& e) {
      throw ctcx::DataError(e.what());
    }
  });
}

void ctcx_evaluate_options_init(ctcx_evaluate_options* opts) {
  if (opts == nullptr) return;
  opts->checkpoint = nullptr;
  opts->manifest = nullptr;
  opts->alphabet = nullptr;
  opts->decoder = CTCX_DECODER_GREEDY;
  opts->beam_width = 8;
  ctcx_feature_config_init(&opts->features);
}

ctcx_status ctcx_evaluate(const ctcx_evaluate_options* opts, char** report) {
  return run_command(report, [&](const ctcx::LogFn& log) {
    require(opts, "opts");
    ctcx::commands::EvaluateOptions o;
    o.checkpoint = str(opts->checkpoint);
    o.manifest = str(opts->manifest);
    o.alphabet = str(opts->alphabet);
    o.decoder = to_cpp(opts->decoder);
    o.beam_width = opts->beam_width;
    o.features = to_cpp(opts->features);
    return ctcx::commands::evaluate(o, log);
  });
}

void ctcx_decode_options_init(ctcx_decode_options* opts) {
  if (opts == nullptr) return;
  opts->checkpoint = nullptr;
  opts->wav = nullptr;
  opts->alphabet = nullptr;
  opts->decoder = CTCX_DECODER_GREEDY;
  opts->beam_width = 8;
  ctcx_feature_config_init(&opts->features);
}

ctcx_status ctcx_decode(const ctcx_decode_options* opts, char** report) {
  return run_command(report, [&](const ctcx::LogFn& log) {
    require(opts, "opts");
    ctcx::commands::DecodeOptions o;
    o.checkpoint = str(opts->checkpoint);
    o.wav = str(opts->wav);
    o.alphabet = str(opts->alphabet);
    o.decoder = to_cpp(opts->decoder);
    o.beam_width = opts->beam_width;
    o.features = to_cpp(opts->features);
    return ctcx::commands::decode(o, log);
  });
}

void ctcx_experiment_options_init(ctcx_experiment_options* opts) {
  if (opts == nullptr) return;
  opts->manifest = nullptr;
  opts->alphabet = "kk";
  opts->source_checkpoints = nullptr;
  opts->num_source_checkpoints = 0;
  opts->out_dir = nullptr;
  opts->hidden = 128;
  opts->strict_paper = 0;
  ctcx_train_config_init(&opts->train);
  ctcx_feature_config_init(&opts->features);
}

ctcx_status ctcx_experiment(const ctcx_experiment_options* opts, char** report) {
  return run_command(report, [&](const ctcx::LogFn& log) {
    require(opts, "opts");
    ctcx::commands::ExperimentOptions o;
    o.manifest = str(opts->manifest);
    o.alphabet = str(opts->alphabet);
    if (opts->num_source_checkpoints > 0) require(opts->source_checkpoints, "source_checkpoints");
    for (size_t i = 0; i < opts->num_source_checkpoints; ++i) {
      o.source_checkpoints.push_back(str(opts->source_checkpoints[i]));
    }
    o.out_dir = str(opts->out_dir);
    o.hidden = opts->hidden;
    o.strict_paper = opts->strict_paper != 0;
    o.train = to_cpp(opts->train);
    o.features = to_cpp(opts->features);
    return ctcx::commands::experiment(o, log);
  });
}

ctcx_status ctcx_format_experiment_table(const char* report_json, char** table) {
  return guarded([&] {
    require(report_json, "report_json");
    require(table, "table");
    nlohmann::json report;
    try {
      report = nlohmann::json::parse(report_json);
      *table = dup_string(ctcx::commands::format_experiment_table(report));
    } catch (const nlohmann::json::exception& e) {
      throw ctcx::UsageError(std::string("malformed experiment report: ") + e.what());
    }
    return CTCX_OK;
  });
}

}  // extern "C"
