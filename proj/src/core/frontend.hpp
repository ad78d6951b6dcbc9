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
#include "matrix.hpp"

namespace ctcx {

struct AudioClip {
  std::vector<double> samples;  // mono, [-1, 1]
  int sample_rate_hz = 0;

  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

// Distinct failure modes of the WAV reader.
class WavError : public DataError {
 public:
  enum class Reason { kOpen, kNotRiff, kNotPcm, kChannels, kBitDepth, kTruncated };
  WavError(Reason reason, const std::string& what) : DataError(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

// RIFF/WAVE, 16-bit PCM, mono. Samples are scaled by 1/32768.
AudioClip load_wav(const std::string& path);
// Writes 16-bit PCM mono; samples are clamped to [-1, 1).
void write_wav(const AudioClip& clip, const std::string& path);

// Band-limited windowed-sinc resampling (Kaiser window, 16 zero crossings
// per side). Output length is round(|samples| * target / source); equal
// rates return the input unchanged.
AudioClip resample(const AudioClip& clip, int target_hz);

struct FeatureConfig {
  int sample_rate_hz = 16000;
  double preemphasis = 0.97;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int fft_size = 512;
  int n_mels = 26;
  int n_mfcc = 13;
  double mel_fmin_hz = 0.0;
  double mel_fmax_hz = 8000.0;

  int window_samples() const;
  int hop_samples() const;
  // Throws UsageError on inconsistent settings.
  void validate() const;

  bool operator==(const FeatureConfig&) const = default;
};

struct FeatureMatrix {
  MatrixD values;  // T x F, time-major
  FeatureConfig config;

  int frames() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

// 1 + floor((n - window) / hop), or 0 when n < window.
int frame_count(int64_t num_samples, const FeatureConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels x (fft_size/2 + 1) triangular filters with unit peak, HTK mel
// scale, edges equally spaced in mel between fmin and fmax.
MatrixD mel_filterbank(const FeatureConfig& cfg);
// Center frequency of every filter, in Hz.
std::vector<double> mel_centers_hz(const FeatureConfig& cfg);

// Orthonormal DCT-II, n x n.
MatrixD dct_matrix(int n);

// Log mel energies (T x n_mels), the stage right before the DCT.
MatrixD log_mel_energies(const AudioClip& clip, const FeatureConfig& cfg);
FeatureMatrix mfcc(const AudioClip& clip, const FeatureConfig& cfg);

// Per-column zero mean, unit variance over the utterance. Zero-variance
// columns (and single-frame inputs) come out as zeros.
FeatureMatrix feature_normalize(const FeatureMatrix& fm);

// Feature cache: "MFCC", u32 version, u32 T, u32 F, then T*F f32, all
// little-endian, row-major.
inline constexpr uint32_t kFeatureCacheVersion = 1;
void write_feature_cache(const MatrixD& values, const std::string& path);
MatrixD read_feature_cache(const std::string& path);
// Reads only the header; returns {T, F}.
std::pair<uint32_t, uint32_t> read_feature_cache_shape(const std::string& path);

struct ManifestRow {
  std::string audio;
  std::string text;
  std::optional<double> duration_s;
  // Path of a precomputed feature cache, when one exists.
  std::string features;
};

// JSON Lines: {"audio": str, "text": str, "duration_s": num[, "features": str]}.
std::vector<ManifestRow> read_manifest(const std::string& path);
void write_manifest(const std::vector<ManifestRow>& rows, const std::string& path);

inline constexpr double kMaxUtteranceSeconds = 15.0;

// Drops rows longer than 15 s (15 s itself is kept). Throws DataError
// naming the first row without a duration.
std::vector<ManifestRow> duration_filter(const std::vector<ManifestRow>& rows);

}  // namespace ctcx
