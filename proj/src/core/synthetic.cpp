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

#include "synthetic.hpp"

#include "rng.hpp"

namespace ctcx {

VectorD symbol_prototype(char32_t cp, uint64_t prototype_seed, int dim) {
  Rng rng(mix_seed(prototype_seed, static_cast<uint64_t>(cp)));
  VectorD v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}

std::vector<SyntheticUtterance> generate_synthetic(const Alphabet& alphabet,
                                                   const SyntheticSpec& spec) {
  if (spec.min_labels < 1 || spec.max_labels < spec.min_labels ||
      spec.min_frames_per_label < 1 || spec.max_frames_per_label < spec.min_frames_per_label ||
      spec.max_gap_frames < 0 || spec.feature_dim < 1) {
    throw UsageError("synthetic corpus: inconsistent spec");
  }
  const std::u32string letters = alphabet.letters();
  if (letters.empty()) throw UsageError("synthetic corpus: alphabet has no letters");

  Rng rng(mix_seed(spec.seed, 0x5e7));
  auto between = [&rng](int lo, int hi) {
    return lo + static_cast<int>(rng.below(static_cast<uint64_t>(hi - lo + 1)));
  };

  std::vector<SyntheticUtterance> out;
  out.reserve(spec.count);
  for (size_t n = 0; n < spec.count; ++n) {
    const int length = between(spec.min_labels, spec.max_labels);
    std::u32string text;
    for (int i = 0; i < length; ++i) {
      const bool interior = i > 0 && i + 1 < length && text.back() != U' ';
      if (interior && rng.uniform() < spec.space_probability) {
        text.push_back(U' ');
      } else {
        text.push_back(letters[static_cast<size_t>(rng.below(letters.size()))]);
      }
    }

    std::vector<VectorD> frames;
    const VectorD silence = VectorD::Zero(spec.feature_dim);
    auto emit = [&](const VectorD& base, int count) {
      for (int k = 0; k < count; ++k) {
        VectorD f = base;
        for (int d = 0; d < spec.feature_dim; ++d) f[d] += spec.noise_std * rng.normal();
        frames.push_back(std::move(f));
      }
    };
    emit(silence, between(1, std::max(1, spec.max_gap_frames)));
    for (size_t i = 0; i < text.size(); ++i) {
      emit(symbol_prototype(text[i], spec.prototype_seed, spec.feature_dim),
           between(spec.min_frames_per_label, spec.max_frames_per_label));
      // Identical neighbours need a separating gap to stay distinguishable.
      const bool repeat_next = i + 1 < text.size() && text[i + 1] == text[i];
      emit(silence, between(repeat_next ? 1 : 0, std::max(1, spec.max_gap_frames)));
    }

    SyntheticUtterance utt;
    utt.text = utf8_encode(text);
    utt.features.resize(static_cast<Eigen::Index>(frames.size()), spec.feature_dim);
    for (size_t t = 0; t < frames.size(); ++t) {
      utt.features.row(static_cast<Eigen::Index>(t)) = frames[t].transpose();
    }
    out.push_back(std::move(utt));
  }
  return out;
}

}  // namespace ctcx
