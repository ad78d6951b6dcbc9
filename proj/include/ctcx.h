/*
 * Copyright 2026 The ctcx Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the ctcx speech recognition library.
 *
 * Every fallible call returns a ctcx_status. On failure the message is
 * available from ctcx_last_error() on the same thread until the next call.
 * Strings handed out through char** parameters are owned by the caller and
 * must be released with ctcx_string_free(). Reports are UTF-8 JSON.
 */
#ifndef CTCX_H_
#define CTCX_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CTCX_BUILDING_LIBRARY)
#define CTCX_API __declspec(dllexport)
#else
#define CTCX_API __declspec(dllimport)
#endif
#else
#define CTCX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctcx_status {
  CTCX_OK = 0,
  CTCX_ERROR_USAGE = 1,   /* bad arguments or options */
  CTCX_ERROR_DATA = 2,    /* unreadable or inconsistent input data */
  CTCX_ERROR_RUNTIME = 3  /* anything else */
} ctcx_status;

typedef enum ctcx_decoder { CTCX_DECODER_GREEDY = 0, CTCX_DECODER_BEAM = 1 } ctcx_decoder;

typedef struct ctcx_alphabet ctcx_alphabet;
typedef struct ctcx_model ctcx_model;

/* Progress and warning lines emitted while commands run. */
typedef void (*ctcx_log_fn)(const char* line, void* user_data);

CTCX_API const char* ctcx_version(void);
CTCX_API const char* ctcx_last_error(void);
CTCX_API void ctcx_string_free(char* s);
/* Process-wide; pass NULL to silence. */
CTCX_API void ctcx_set_log_callback(ctcx_log_fn fn, void* user_data);

/* ---- alphabets ---- */

/* A built-in name ("ru", "kk") or a path to a one-symbol-per-line file. */
CTCX_API ctcx_status ctcx_alphabet_open(const char* name_or_path, ctcx_alphabet** out);
CTCX_API void ctcx_alphabet_free(ctcx_alphabet* alphabet);
/* Number of symbols, excluding the blank. */
CTCX_API int32_t ctcx_alphabet_size(const ctcx_alphabet* alphabet);
CTCX_API ctcx_status ctcx_alphabet_normalize(const ctcx_alphabet* alphabet, const char* text,
                                             char** out);
/* Writes up to `capacity` labels; *length receives the full count even when
 * it exceeds the capacity. */
CTCX_API ctcx_status ctcx_alphabet_encode(const ctcx_alphabet* alphabet, const char* text,
                                          int32_t* labels, size_t capacity, size_t* length);
CTCX_API ctcx_status ctcx_alphabet_decode(const ctcx_alphabet* alphabet, const int32_t* labels,
                                          size_t length, char** out);

/* ---- models ---- */

CTCX_API ctcx_status ctcx_model_load(const char* path, ctcx_model** out);
CTCX_API void ctcx_model_free(ctcx_model* model);
/* JSON with the architecture, alphabet and tensor names. */
CTCX_API ctcx_status ctcx_model_info(const ctcx_model* model, char** json);
/* features: frames x feature_dim, row-major, already normalized. logits
 * must hold frames x num_classes floats. */
CTCX_API ctcx_status ctcx_model_logits(const ctcx_model* model, const float* features,
                                       size_t frames, size_t feature_dim, float* logits);
CTCX_API ctcx_status ctcx_model_transcribe(const ctcx_model* model, const char* wav_path,
                                           ctcx_decoder decoder, int beam_width,
                                           char** transcript);

/* ---- configuration ---- */

typedef struct ctcx_feature_config {
  int sample_rate_hz;
  double preemphasis;
  double window_ms;
  double hop_ms;
  int fft_size;
  int n_mels;
  int n_mfcc;
  double mel_fmin_hz;
  double mel_fmax_hz;
} ctcx_feature_config;
CTCX_API void ctcx_feature_config_init(ctcx_feature_config* cfg);
/* Fills cfg from a JSON file; absent keys keep their defaults. */
CTCX_API ctcx_status ctcx_feature_config_load(const char* path, ctcx_feature_config* cfg);

typedef struct ctcx_train_config {
  double learning_rate;
  double momentum;
  int batch_size;
  int epochs;
  double dropout_keep;
  double split[3]; /* train, validation, test */
  double grad_clip_norm; /* <= 0 disables clipping */
  uint64_t seed;
  ctcx_decoder eval_decoder;
  int beam_width;
  int use_fixed_dropout_seed;
  uint64_t fixed_dropout_seed;
} ctcx_train_config;
CTCX_API void ctcx_train_config_init(ctcx_train_config* cfg);

/* ---- commands ----
 * Each writes a JSON report to *report (possibly also on a data error, when
 * a partial report exists; *report is NULL otherwise). */

typedef struct ctcx_prepare_options {
  const char* manifest;
  const char* alphabet;
  const char* out;
  size_t synthetic_count; /* > 0 generates a synthetic corpus instead */
  uint64_t synthetic_seed;
  uint64_t prototype_seed;
  ctcx_feature_config features;
} ctcx_prepare_options;
CTCX_API void ctcx_prepare_options_init(ctcx_prepare_options* opts);
CTCX_API ctcx_status ctcx_prepare(const ctcx_prepare_options* opts, char** report);

typedef struct ctcx_features_options {
  const char* manifest;
  const char* out_dir;
  ctcx_feature_config features;
} ctcx_features_options;
CTCX_API void ctcx_features_options_init(ctcx_features_options* opts);
CTCX_API ctcx_status ctcx_features(const ctcx_features_options* opts, char** report);

typedef struct ctcx_train_options {
  const char* manifest;
  const char* alphabet;
  int bidirectional;
  int transfer_init;
  const char* source_checkpoint;
  const char* out_dir;
  int hidden;
  int strict_paper;
  ctcx_train_config train;
  ctcx_feature_config features;
} ctcx_train_options;
CTCX_API void ctcx_train_options_init(ctcx_train_options* opts);
CTCX_API ctcx_status ctcx_train(const ctcx_train_options* opts, char** report);

typedef struct ctcx_transfer_options {
  const char* source;
  const char* target_alphabet;
  const char* out;
  const char* report_path; /* NULL: <out>.report.json */
  uint64_t seed;
  int probes;
} ctcx_transfer_options;
CTCX_API void ctcx_transfer_options_init(ctcx_transfer_options* opts);
CTCX_API ctcx_status ctcx_transfer(const ctcx_transfer_options* opts, char** report);

typedef struct ctcx_evaluate_options {
  const char* checkpoint;
  const char* manifest;
  const char* alphabet; /* optional override */
  ctcx_decoder decoder;
  int beam_width;
  ctcx_feature_config features;
} ctcx_evaluate_options;
CTCX_API void ctcx_evaluate_options_init(ctcx_evaluate_options* opts);
CTCX_API ctcx_status ctcx_evaluate(const ctcx_evaluate_options* opts, char** report);

typedef struct ctcx_decode_options {
  const char* checkpoint;
  const char* wav;
  const char* alphabet; /* optional override */
  ctcx_decoder decoder;
  int beam_width;
  ctcx_feature_config features;
} ctcx_decode_options;
CTCX_API void ctcx_decode_options_init(ctcx_decode_options* opts);
CTCX_API ctcx_status ctcx_decode(const ctcx_decode_options* opts, char** report);

typedef struct ctcx_experiment_options {
  const char* manifest;
  const char* alphabet;
  const char* const* source_checkpoints;
  size_t num_source_checkpoints;
  const char* out_dir;
  int hidden;
  int strict_paper;
  ctcx_train_config train;
  ctcx_feature_config features;
} ctcx_experiment_options;
CTCX_API void ctcx_experiment_options_init(ctcx_experiment_options* opts);
CTCX_API ctcx_status ctcx_experiment(const ctcx_experiment_options* opts, char** report);

/* Renders an experiment report as the results table. */
CTCX_API ctcx_status ctcx_format_experiment_table(const char* report_json, char** table);

#ifdef __cplusplus
}
#endif

#endif /* CTCX_H_ */
