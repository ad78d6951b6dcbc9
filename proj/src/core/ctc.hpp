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

#include <limits>
#include <utility>
#include <vector>

#include "matrix.hpp"
#include "text_labels.hpp"

namespace ctcx {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)), exact for -inf operands.
double log_sum_exp(double a, double b);

// [b, l1, b, l2, ..., b]; length 2L+1.
LabelSeq extend_with_blanks(const LabelSeq& labels, int32_t blank);

// Minimum number of frames able to emit `labels`: L plus one per adjacent
// repeat.
int min_frames(const LabelSeq& labels);

struct CtcResult {
  double neg_log_likelihood = 0.0;  // +inf when no alignment fits
  MatrixD dlogits;                  // T x C, gradient w.r.t. pre-softmax logits
  bool feasible = true;
};

// Full lattices, exposed for conservation checks. alpha(t, s) includes the
// emission at t; beta(t, s) covers frames t+1..T-1 only. Both in log space.
struct CtcLattice {
  MatrixD log_alpha;  // T x S
  MatrixD log_beta;   // T x S
  double log_likelihood = kLogZero;
};

// Blank is the last class (C - 1). Rows of log_probs must be normalized
// log-distributions (checked to 1e-6); otherwise DataError.
CtcResult ctc_forward_backward(const MatrixD& log_probs, const LabelSeq& labels);
CtcLattice ctc_lattice(const MatrixD& log_probs, const LabelSeq& labels);

// Exhaustive oracle over all C^T paths; refuses instances with C^T > 1e6.
double ctc_loss_bruteforce(const MatrixD& log_probs, const LabelSeq& labels);

// Merge repeats, then drop blanks.
LabelSeq collapse_path(const std::vector<int32_t>& path, int32_t blank);

// Per-frame argmax (lowest index wins ties), collapsed.
LabelSeq greedy_decode(const MatrixD& log_probs);

// Prefix beam search over collapsed prefixes. Ties between equal scores go
// to the lexicographically smaller prefix.
LabelSeq beam_search_decode(const MatrixD& log_probs, int beam_width);

// Exhaustive MAP over collapse classes (test oracle; same size limit as the
// brute-force loss). Returns the winning labels and their log probability.
std::pair<LabelSeq, double> exhaustive_map_decode(const MatrixD& log_probs);

// Levenshtein distance with unit costs.
int edit_distance(const LabelSeq& a, const LabelSeq& b);

// edit_distance / |ref|. Throws UsageError for an empty reference.
double label_error_rate(const LabelSeq& ref, const LabelSeq& hyp);

// Sum of edit distances over sum of reference lengths.
double corpus_ler(const std::vector<std::pair<LabelSeq, LabelSeq>>& pairs);

}  // namespace ctcx
