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
#include <string>
#include <vector>

#include "matrix.hpp"
#include "text_labels.hpp"

namespace ctcx {

// Desk-scale stand-in for a speech corpus. Every symbol owns a prototype
// feature vector derived from (prototype_seed, code point), so two
// alphabets sharing a letter also share its acoustics. An utterance is a
// random normalized transcript rendered as a run of noisy prototype frames
// per label, separated by silence frames.
struct SyntheticSpec {
  size_t count = 10;
  uint64_t seed = 1;
  uint64_t prototype_seed = 20200101;
  int feature_dim = 13;
  int min_labels = 6;
  int max_labels = 10;
  int min_frames_per_label = 3;
  int max_frames_per_label = 5;
  int max_gap_frames = 2;
  double noise_std = 0.3;
  double space_probability = 0.15;
};

struct SyntheticUtterance {
  std::string text;
  MatrixD features;  // T x feature_dim
};

VectorD symbol_prototype(char32_t cp, uint64_t prototype_seed, int dim);

std::vector<SyntheticUtterance> generate_synthetic(const Alphabet& alphabet,
                                                   const SyntheticSpec& spec);

}  // namespace ctcx
