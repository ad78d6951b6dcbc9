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

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "frontend.hpp"

namespace ctcx {

namespace {

constexpr double kLogFloor = 1e-10;

// fftw planning is not thread-safe; execution on plan-compatible buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(int n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n_, in_.get(), out_.get(), FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error(ErrorKind::kRuntime, "fftw planning failed");
  }
  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }

  // |X_k|^2 for k = 0..n/2 into `power`.
  void power_spectrum(double* power) {
    fftw_execute(plan_);
    for (int k = 0; k <= n_ / 2; ++k) {
      power[k] = out_.get()[k][0] * out_.get()[k][0] + out_.get()[k][1] * out_.get()[k][1];
    }
  }

 private:
  int n_;
  std::unique_ptr<double, FftwDeleter> in_;
  std::unique_ptr<fftw_complex, FftwDeleter> out_;
  fftw_plan plan_ = nullptr;
};

}  // namespace

int FeatureConfig::window_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * window_ms / 1000.0));
}

int FeatureConfig::hop_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * hop_ms / 1000.0));
}

void FeatureConfig::validate() const {
  if (sample_rate_hz <= 0) throw UsageError("feature config: sample rate must be positive");
  if (window_samples() <= 0 || hop_samples() <= 0) {
    throw UsageError("feature config: window and hop must be at least one sample");
  }
  if (fft_size < window_samples()) throw UsageError("feature config: fft_size < window length");
  if (n_mels <= 0 || n_mfcc <= 0 || n_mfcc > n_mels) {
    throw UsageError("feature config: need 0 < n_mfcc <= n_mels");
  }
  if (mel_fmin_hz < 0 || mel_fmax_hz <= mel_fmin_hz || mel_fmax_hz > sample_rate_hz / 2.0) {
    throw UsageError("feature config: need 0 <= fmin < fmax <= sample_rate/2");
  }
}

int frame_count(int64_t num_samples, const FeatureConfig& cfg) {
  const int window = cfg.window_samples();
  if (num_samples < window) return 0;
  return 1 + static_cast<int>((num_samples - window) / cfg.hop_samples());
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges_hz(const FeatureConfig& cfg) {
  const double lo = hz_to_mel(cfg.mel_fmin_hz);
  const double hi = hz_to_mel(cfg.mel_fmax_hz);
  std::vector<double> edges(static_cast<size_t>(cfg.n_mels) + 2);
  for (size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / (cfg.n_mels + 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_centers_hz(const FeatureConfig& cfg) {
  const std::vector<double> edges = mel_edges_hz(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

MatrixD mel_filterbank(const FeatureConfig& cfg) {
  const std::vector<double> edges = mel_edges_hz(cfg);
  const int bins = cfg.fft_size / 2 + 1;
  MatrixD fb = MatrixD::Zero(cfg.n_mels, bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate_hz / cfg.fft_size;
      const double rising = (f - left) / (center - left);
      const double falling = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(rising, falling));
    }
  }
  return fb;
}

MatrixD dct_matrix(int n) {
  MatrixD d(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      d(k, i) = scale * std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
    }
  }
  return d;
}

MatrixD log_mel_energies(const AudioClip& clip, const FeatureConfig& cfg) {
  cfg.validate();
  if (clip.sample_rate_hz != cfg.sample_rate_hz) {
    throw UsageError("mfcc: clip is " + std::to_string(clip.sample_rate_hz) +
                     " Hz, config expects " + std::to_string(cfg.sample_rate_hz) + " Hz");
  }
  const int window = cfg.window_samples();
  const int hop = cfg.hop_samples();
  const int frames = frame_count(static_cast<int64_t>(clip.samples.size()), cfg);
  if (frames == 0) {
    throw DataError("mfcc: clip has " + std::to_string(clip.samples.size()) +
                    " samples, shorter than one " + std::to_string(window) + "-sample window");
  }

  std::vector<double> emphasized(clip.samples.size());
  emphasized[0] = clip.samples[0];
  for (size_t i = 1; i < clip.samples.size(); ++i) {
    emphasized[i] = clip.samples[i] - cfg.preemphasis * clip.samples[i - 1];
  }

  std::vector<double> hamming(static_cast<size_t>(window));
  for (int i = 0; i < window; ++i) {
    hamming[i] = window == 1 ? 1.0
                             : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (window - 1));
  }

  const MatrixD fb = mel_filterbank(cfg);
  const int bins = cfg.fft_size / 2 + 1;
  VectorD power(bins);
  RealFft fft(cfg.fft_size);
  MatrixD out(frames, cfg.n_mels);
  for (int t = 0; t < frames; ++t) {
    double* in = fft.input();
    const size_t start = static_cast<size_t>(t) * hop;
    for (int i = 0; i < cfg.fft_size; ++i) {
      in[i] = i < window ? emphasized[start + i] * hamming[i] : 0.0;
    }
    fft.power_spectrum(power.data());
    const VectorD energies = fb * power;
    for (int m = 0; m < cfg.n_mels; ++m) {
      out(t, m) = std::log(std::max(energies[m], kLogFloor));
    }
  }
  return out;
}

FeatureMatrix mfcc(const AudioClip& clip, const FeatureConfig& cfg) {
  const MatrixD log_mel = log_mel_energies(clip, cfg);
  const MatrixD dct = dct_matrix(cfg.n_mels).topRows(cfg.n_mfcc);
  FeatureMatrix fm;
  fm.config = cfg;
  fm.values = log_mel * dct.transpose();
  return fm;
}

FeatureMatrix feature_normalize(const FeatureMatrix& fm) {
  FeatureMatrix out = fm;
  const auto rows = fm.values.rows();
  for (Eigen::Index c = 0; c < fm.values.cols(); ++c) {
    const double mean = fm.values.col(c).mean();
    const double var = (fm.values.col(c).array() - mean).square().sum() / static_cast<double>(rows);
    // Summation rounding leaves a tiny residue on constant columns.
    if (rows < 2 || !(var > 1e-24 * std::max(1.0, mean * mean))) {
      out.values.col(c).setZero();
    } else {
      out.values.col(c) = (fm.values.col(c).array() - mean) / std::sqrt(var);
    }
  }
  return out;
}

}  // namespace ctcx
