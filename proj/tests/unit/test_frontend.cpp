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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "frontend.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace ctcx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ctcx_frontend_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

AudioClip sine(double freq, double seconds, int rate, double amp = 0.5) {
  AudioClip c;
  c.sample_rate_hz = rate;
  const auto n = static_cast<size_t>(std::llround(seconds * rate));
  for (size_t i = 0; i < n; ++i) c.samples.push_back(amp * std::sin(2 * M_PI * freq * i / rate));
  return c;
}

void put(std::string& s, uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Hand-built WAV with arbitrary header fields.
std::string wav_bytes(uint16_t format, uint16_t channels, uint32_t rate, uint16_t bits,
                      uint32_t data_bytes, size_t actual_data) {
  std::string s = "RIFF";
  put(s, static_cast<uint32_t>(36 + data_bytes), 4);
  s += "WAVEfmt ";
  put(s, 16, 4);
  put(s, format, 2);
  put(s, channels, 2);
  put(s, rate, 4);
  put(s, rate * channels * bits / 8, 4);
  put(s, static_cast<uint32_t>(channels * bits / 8), 2);
  put(s, bits, 2);
  s += "data";
  put(s, data_bytes, 4);
  s.append(actual_data, '\0');
  return s;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

WavError::Reason reason_of(const std::string& path) {
  try {
    load_wav(path);
  } catch (const WavError& e) {
    return e.reason();
  }
  FAIL("expected WavError");
  return WavError::Reason::kOpen;
}

}  // namespace

TEST_CASE("wav round trip keeps 16-bit samples") {
  TempDir dir;
  const AudioClip clip = sine(440, 0.1, 16000);
  write_wav(clip, dir / "a.wav");
  const AudioClip back = load_wav(dir / "a.wav");
  CHECK(back.sample_rate_hz == 16000);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - clip.samples[i]) <= 1.0 / 32768.0);
  }
  CHECK(back.duration_s() == doctest::Approx(0.1));
}

TEST_CASE("wav reader distinguishes failure modes") {
  TempDir dir;
  CHECK(reason_of(dir / "missing.wav") == WavError::Reason::kOpen);
  write_file(dir / "text.wav", "hello, this is not audio at all.........");
  CHECK(reason_of(dir / "text.wav") == WavError::Reason::kNotRiff);
  write_file(dir / "float.wav", wav_bytes(3, 1, 16000, 32, 8, 8));
  CHECK(reason_of(dir / "float.wav") == WavError::Reason::kNotPcm);
  write_file(dir / "stereo.wav", wav_bytes(1, 2, 16000, 16, 8, 8));
  CHECK(reason_of(dir / "stereo.wav") == WavError::Reason::kChannels);
  write_file(dir / "u8.wav", wav_bytes(1, 1, 16000, 8, 8, 8));
  CHECK(reason_of(dir / "u8.wav") == WavError::Reason::kBitDepth);
  write_file(dir / "short.wav", wav_bytes(1, 1, 16000, 16, 1000, 10));
  CHECK(reason_of(dir / "short.wav") == WavError::Reason::kTruncated);
}

TEST_CASE("stereo diagnostic names the channel count") {
  TempDir dir;
  write_file(dir / "stereo.wav", wav_bytes(1, 2, 16000, 16, 8, 8));
  try {
    load_wav(dir / "stereo.wav");
  } catch (const WavError& e) {
    CHECK(std::string(e.what()).find("channels=2") != std::string::npos);
  }
}

TEST_CASE("resampling output length and identity") {
  const AudioClip half = sine(200, 0.5, 8000);
  CHECK(resample(half, 16000).samples.size() == 8000);
  const AudioClip c = sine(300, 0.3, 16000);
  const AudioClip same = resample(c, 16000);
  CHECK(same.samples == c.samples);
  CHECK(resample(sine(100, 1.0, 44100), 16000).samples.size() == 16000);
  CHECK_THROWS_AS(resample(c, 0), UsageError);
}

TEST_CASE("resampling preserves a tone and rejects aliases") {
  // 1 kHz tone at 44.1 kHz -> 16 kHz: energy stays at 1 kHz.
  const AudioClip down = resample(sine(1000, 0.5, 44100), 16000);
  std::vector<double> mid(down.samples.begin() + 1000, down.samples.end() - 1000);
  const double at_tone = oracle::dft_magnitude(mid, 1000, 16000);
  const double off_tone = oracle::dft_magnitude(mid, 3000, 16000);
  CHECK(at_tone > 100.0 * off_tone);
  CHECK(at_tone / mid.size() == doctest::Approx(0.25).epsilon(0.02));

  // 10 kHz tone is above the 8 kHz Nyquist of the target and must vanish.
  const AudioClip alias = resample(sine(10000, 0.5, 44100), 16000);
  std::vector<double> amid(alias.samples.begin() + 1000, alias.samples.end() - 1000);
  double rms = 0.0;
  for (double v : amid) rms += v * v;
  rms = std::sqrt(rms / amid.size());
  CHECK(rms < 0.01);
}

TEST_CASE("upsampling interpolates a smooth tone") {
  const AudioClip up = resample(sine(500, 0.25, 8000), 16000);
  const AudioClip ref = sine(500, 0.25, 16000);
  REQUIRE(up.samples.size() == ref.samples.size());
  double worst = 0.0;
  for (size_t i = 200; i + 200 < ref.samples.size(); ++i) {
    worst = std::max(worst, std::abs(up.samples[i] - ref.samples[i]));
  }
  CHECK(worst < 5e-3);
}

TEST_CASE("frame count formula") {
  const FeatureConfig cfg;
  CHECK(cfg.window_samples() == 400);
  CHECK(cfg.hop_samples() == 160);
  CHECK(frame_count(399, cfg) == 0);
  CHECK(frame_count(400, cfg) == 1);
  CHECK(frame_count(559, cfg) == 1);
  CHECK(frame_count(560, cfg) == 2);
  CHECK(frame_count(16000, cfg) == 98);
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto n = static_cast<int64_t>(400 + rng.below(50000));
    AudioClip c;
    c.sample_rate_hz = 16000;
    c.samples.assign(static_cast<size_t>(n), 0.0);
    for (auto& v : c.samples) v = 0.1 * rng.normal();
    CHECK(mfcc(c, cfg).frames() == 1 + (n - 400) / 160);
  }
}

TEST_CASE("mfcc rejects clips shorter than a window or at the wrong rate") {
  AudioClip c;
  c.sample_rate_hz = 16000;
  c.samples.assign(399, 0.0);
  CHECK_THROWS_AS(mfcc(c, FeatureConfig{}), Error);
  c.samples.assign(1000, 0.0);
  c.sample_rate_hz = 8000;
  CHECK_THROWS_AS(mfcc(c, FeatureConfig{}), Error);
}

TEST_CASE("silence maps to the floor vector") {
  AudioClip c;
  c.sample_rate_hz = 16000;
  c.samples.assign(4000, 0.0);
  const FeatureConfig cfg;
  const FeatureMatrix fm = mfcc(c, cfg);
  const MatrixD dct = dct_matrix(cfg.n_mels);
  const double floor = std::log(1e-10);
  for (int t = 0; t < fm.frames(); ++t) {
    for (int k = 0; k < cfg.n_mfcc; ++k) {
      double expect = 0.0;
      for (int m = 0; m < cfg.n_mels; ++m) expect += dct(k, m) * floor;
      CHECK(fm.values(t, k) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  // Only c0 survives: a constant vector is orthogonal to every other basis row.
  CHECK(fm.values(0, 0) == doctest::Approx(floor * std::sqrt(26.0)));
  CHECK(std::abs(fm.values(0, 3)) < 1e-9);
}

TEST_CASE("a 1 kHz tone peaks in the filter centered nearest 1 kHz") {
  const FeatureConfig cfg;
  const MatrixD energies = log_mel_energies(sine(1000, 0.5, 16000), cfg);
  const auto centers = mel_centers_hz(cfg);
  int nearest = 0;
  for (int m = 1; m < cfg.n_mels; ++m) {
    if (std::abs(centers[m] - 1000) < std::abs(centers[nearest] - 1000)) nearest = m;
  }
  for (Eigen::Index t = 0; t < energies.rows(); ++t) {
    Eigen::Index best = 0;
    energies.row(t).maxCoeff(&best);
    CHECK(best == nearest);
  }
}

TEST_CASE("mel filterbank shape") {
  const FeatureConfig cfg;
  const MatrixD fb = mel_filterbank(cfg);
  CHECK(fb.rows() == 26);
  CHECK(fb.cols() == 257);
  CHECK(fb.minCoeff() >= 0.0);
  for (int m = 0; m < 26; ++m) {
    CHECK(fb.row(m).maxCoeff() <= 1.0 + 1e-12);
    CHECK(fb.row(m).maxCoeff() > 0.5);
  }
  CHECK(hz_to_mel(mel_to_hz(1234.5)) == doctest::Approx(1234.5));
  CHECK(hz_to_mel(1000) == doctest::Approx(999.99).epsilon(1e-4));
}

TEST_CASE("dct matrix is orthonormal") {
  for (int n : {4, 13, 26}) {
    const MatrixD d = dct_matrix(n);
    const MatrixD eye = MatrixD::Identity(n, n);
    CHECK((d * d.transpose() - eye).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("feature normalization") {
  FeatureMatrix fm;
  fm.values.resize(4, 3);
  fm.values << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 8;
  const FeatureMatrix n = feature_normalize(fm);
  for (int k = 0; k < 3; ++k) {
    const double mean = n.values.col(k).mean();
    CHECK(std::abs(mean) < 1e-12);
  }
  CHECK(n.values.col(1).cwiseAbs().maxCoeff() == 0.0);
  const double var = n.values.col(0).squaredNorm() / 4.0;
  CHECK(var == doctest::Approx(1.0));
  FeatureMatrix one;
  one.values = MatrixD::Constant(1, 3, 7.0);
  CHECK(feature_normalize(one).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("feature cache round trip and header") {
  TempDir dir;
  MatrixD m(7, 13);
  Rng rng(3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.normal());
  write_feature_cache(m, dir / "x.mfcc");
  const auto shape = read_feature_cache_shape(dir / "x.mfcc");
  CHECK(shape.first == 7);
  CHECK(shape.second == 13);
  CHECK(read_feature_cache(dir / "x.mfcc") == m);
  write_file(dir / "bad.mfcc", "MFCX\1\0\0\0");
  CHECK_THROWS_AS(read_feature_cache(dir / "bad.mfcc"), DataError);
}

TEST_CASE("manifest io and duration filter") {
  TempDir dir;
  std::vector<ManifestRow> rows = {{"a.wav", "сәлем", 3.0, ""},
                                   {"b.wav", "ұзын", 16.0, ""},
                                   {"c.wav", "шек", 15.0, "c.mfcc"}};
  write_manifest(rows, dir / "m.jsonl");
  const auto back = read_manifest(dir / "m.jsonl");
  REQUIRE(back.size() == 3);
  CHECK(back[2].features == "c.mfcc");
  CHECK(back[0].text == "сәлем");
  const auto kept = duration_filter(back);
  REQUIRE(kept.size() == 2);
  CHECK(kept[1].audio == "c.wav");
  std::vector<ManifestRow> missing = {{"d.wav", "x", std::nullopt, ""}};
  CHECK_THROWS_AS(duration_filter(missing), DataError);
  write_file(dir / "broken.jsonl", "{\"audio\": 1}\n");
  CHECK_THROWS_AS(read_manifest(dir / "broken.jsonl"), DataError);
}
