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

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "frontend.hpp"

namespace ctcx {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t read_u16(const std::vector<unsigned char>& b, size_t at) {
  return static_cast<uint16_t>(b[at] | (b[at + 1] << 8));
}

uint32_t read_u32(const std::vector<unsigned char>& b, size_t at) {
  return static_cast<uint32_t>(b[at]) | (static_cast<uint32_t>(b[at + 1]) << 8) |
         (static_cast<uint32_t>(b[at + 2]) << 16) | (static_cast<uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<unsigned char>& b, uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xFF));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

bool tag_is(const std::vector<unsigned char>& b, size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

// Kaiser window sampled on [0, 1]; linear interpolation in between.
class KaiserTable {
 public:
  explicit KaiserTable(double beta) : table_(kSize + 1) {
    const double norm = std::cyl_bessel_i(0.0, beta);
    for (int i = 0; i <= kSize; ++i) {
      const double x = static_cast<double>(i) / kSize;
      table_[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - x * x))) / norm;
    }
  }

  double operator()(double x) const {
    x = std::abs(x);
    if (x >= 1.0) return 0.0;
    const double pos = x * kSize;
    const auto i = static_cast<int>(pos);
    const double frac = pos - i;
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  static constexpr int kSize = 4096;
  std::vector<double> table_;
};

constexpr int kZeroCrossings = 16;
constexpr double kKaiserBeta = 8.6;

}  // namespace

AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavError::Reason::kOpen, "cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw WavError(WavError::Reason::kNotRiff, path + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  uint16_t channels = 0;
  uint16_t bits = 0;
  uint32_t rate = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint32_t chunk_size = read_u32(bytes, pos + 4);
    const size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) {
        throw WavError(WavError::Reason::kTruncated, path + ": truncated fmt chunk");
      }
      uint16_t format = read_u16(bytes, body);
      if (format == kFormatExtensible && chunk_size >= 40) {
        format = read_u16(bytes, body + 24);  // first two bytes of the sub-format GUID
      }
      if (format != kFormatPcm) {
        throw WavError(WavError::Reason::kNotPcm,
                       path + ": format=" + std::to_string(format) + " is not PCM");
      }
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (channels != 1) {
        throw WavError(WavError::Reason::kChannels,
                       path + ": channels=" + std::to_string(channels) + " unsupported");
      }
      if (bits != 16) {
        throw WavError(WavError::Reason::kBitDepth,
                       path + ": bits_per_sample=" + std::to_string(bits) + " unsupported");
      }
      if (rate == 0) throw WavError(WavError::Reason::kNotPcm, path + ": sample rate is 0");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw WavError(WavError::Reason::kNotRiff, path + ": data before fmt chunk");
      if (body + chunk_size > bytes.size()) {
        throw WavError(WavError::Reason::kTruncated,
                       path + ": data chunk declares " + std::to_string(chunk_size) +
                           " bytes, only " + std::to_string(bytes.size() - body) + " present");
      }
      const size_t count = chunk_size / 2;
      if (count == 0) throw WavError(WavError::Reason::kTruncated, path + ": no samples");
      AudioClip clip;
      clip.sample_rate_hz = static_cast<int>(rate);
      clip.samples.resize(count);
      for (size_t i = 0; i < count; ++i) {
        const auto raw = static_cast<int16_t>(read_u16(bytes, body + 2 * i));
        clip.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return clip;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw WavError(have_fmt ? WavError::Reason::kTruncated : WavError::Reason::kNotRiff,
                 path + (have_fmt ? ": missing data chunk" : ": missing fmt chunk"));
}

void write_wav(const AudioClip& clip, const std::string& path) {
  const auto data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  std::vector<unsigned char> b;
  b.reserve(44 + data_bytes);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put_u32(b, 36 + data_bytes);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(b, 16);
  put_u16(b, kFormatPcm);
  put_u16(b, 1);
  put_u32(b, static_cast<uint32_t>(clip.sample_rate_hz));
  put_u32(b, static_cast<uint32_t>(clip.sample_rate_hz) * 2);
  put_u16(b, 2);
  put_u16(b, 16);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put_u32(b, data_bytes);
  for (double s : clip.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto v = static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(b, static_cast<uint16_t>(v));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

AudioClip resample(const AudioClip& clip, int target_hz) {
  if (target_hz <= 0) throw UsageError("resample: target rate must be positive");
  if (clip.sample_rate_hz <= 0 || clip.samples.empty()) {
    throw UsageError("resample: invalid input clip");
  }
  if (clip.sample_rate_hz == target_hz) return clip;

  static const KaiserTable kaiser(kKaiserBeta);
  const double ratio = static_cast<double>(target_hz) / clip.sample_rate_hz;
  // Cutoff as a fraction of the input Nyquist; lowered when decimating.
  const double cutoff = std::min(1.0, ratio);
  const double half_width = kZeroCrossings / cutoff;
  const auto n_in = static_cast<int64_t>(clip.samples.size());
  const auto n_out = static_cast<int64_t>(std::llround(static_cast<double>(n_in) * ratio));

  AudioClip out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(static_cast<size_t>(std::max<int64_t>(n_out, 1)));
  for (int64_t j = 0; j < static_cast<int64_t>(out.samples.size()); ++j) {
    const double t = static_cast<double>(j) / ratio;
    const auto first = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(t - half_width)));
    const auto last = std::min<int64_t>(n_in - 1, static_cast<int64_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (int64_t n = first; n <= last; ++n) {
      const double d = t - static_cast<double>(n);
      const double x = cutoff * d;
      const double sinc = (x == 0.0) ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      acc += clip.samples[static_cast<size_t>(n)] * cutoff * sinc * kaiser(d / half_width);
    }
    out.samples[static_cast<size_t>(j)] = std::clamp(acc, -1.0, 1.0);
  }
  return out;
}

}  // namespace ctcx
