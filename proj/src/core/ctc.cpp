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

#include "ctc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ctcx {

namespace {

constexpr double kRowTolerance = 1e-6;
constexpr double kMaxEnumeratedPaths = 1e6;

int32_t blank_of(const MatrixD& log_probs) { return static_cast<int32_t>(log_probs.cols()) - 1; }

void check_distribution(const MatrixD& log_probs) {
  if (log_probs.cols() < 2) throw DataError("ctc: need at least one label class plus blank");
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    double lse = kLogZero;
    for (Eigen::Index k = 0; k < log_probs.cols(); ++k) {
      const double v = log_probs(t, k);
      if (std::isnan(v) || v > 0.0) {
        throw DataError("ctc: frame " + std::to_string(t) + " holds an invalid log probability");
      }
      lse = log_sum_exp(lse, v);
    }
    if (std::abs(lse) > kRowTolerance) {
      throw DataError("ctc: frame " + std::to_string(t) + " does not sum to one (log-sum " +
                      std::to_string(lse) + ")");
    }
  }
}

void check_labels(const LabelSeq& labels, int32_t blank) {
  for (int32_t id : labels) {
    if (id < 0 || id >= blank) {
      throw DataError("ctc: label id " + std::to_string(id) + " outside [0, " +
                      std::to_string(blank) + ")");
    }
  }
}

// Can position s be entered directly from s-2 (skipping a blank)?
bool can_skip(const LabelSeq& ext, Eigen::Index s, int32_t blank) {
  return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
}

void check_enumerable(const MatrixD& log_probs) {
  const double paths = std::pow(static_cast<double>(log_probs.cols()),
                                static_cast<double>(log_probs.rows()));
  if (paths > kMaxEnumeratedPaths) {
    throw UsageError("exhaustive CTC oracle: C^T = " + std::to_string(paths) +
                     " exceeds the 1e6 path limit");
  }
}

// Calls fn(path, log_prob) for every length-T path.
template <typename Fn>
void for_each_path(const MatrixD& log_probs, Fn&& fn) {
  const auto steps = static_cast<size_t>(log_probs.rows());
  const auto classes = static_cast<int32_t>(log_probs.cols());
  std::vector<int32_t> path(steps, 0);
  while (true) {
    double lp = 0.0;
    for (size_t t = 0; t < steps; ++t) lp += log_probs(static_cast<Eigen::Index>(t), path[t]);
    fn(path, lp);
    size_t t = 0;
    while (t < steps && ++path[t] == classes) path[t++] = 0;
    if (t == steps) break;
  }
}

}  // namespace

double log_sum_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

LabelSeq extend_with_blanks(const LabelSeq& labels, int32_t blank) {
  LabelSeq ext(2 * labels.size() + 1, blank);
  for (size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  return ext;
}

int min_frames(const LabelSeq& labels) {
  int frames = static_cast<int>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++frames;
  }
  return frames;
}

CtcLattice ctc_lattice(const MatrixD& log_probs, const LabelSeq& labels) {
  check_distribution(log_probs);
  const int32_t blank = blank_of(log_probs);
  check_labels(labels, blank);
  const Eigen::Index steps = log_probs.rows();
  if (steps < 1) throw DataError("ctc: empty input sequence");
  const LabelSeq ext = extend_with_blanks(labels, blank);
  const auto states = static_cast<Eigen::Index>(ext.size());

  CtcLattice lat;
  lat.log_alpha = MatrixD::Constant(steps, states, kLogZero);
  lat.log_beta = MatrixD::Constant(steps, states, kLogZero);

  lat.log_alpha(0, 0) = log_probs(0, blank);
  if (states > 1) lat.log_alpha(0, 1) = log_probs(0, ext[1]);
  for (Eigen::Index t = 1; t < steps; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double acc = lat.log_alpha(t - 1, s);
      if (s >= 1) acc = log_sum_exp(acc, lat.log_alpha(t - 1, s - 1));
      if (can_skip(ext, s, blank)) acc = log_sum_exp(acc, lat.log_alpha(t - 1, s - 2));
      lat.log_alpha(t, s) = acc == kLogZero ? kLogZero : acc + log_probs(t, ext[s]);
    }
  }

  lat.log_beta(steps - 1, states - 1) = 0.0;
  if (states > 1) lat.log_beta(steps - 1, states - 2) = 0.0;
  for (Eigen::Index t = steps - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      double acc = lat.log_beta(t + 1, s) + log_probs(t + 1, ext[s]);
      if (s + 1 < states) {
        acc = log_sum_exp(acc, lat.log_beta(t + 1, s + 1) + log_probs(t + 1, ext[s + 1]));
      }
      if (s + 2 < states && can_skip(ext, s + 2, blank)) {
        acc = log_sum_exp(acc, lat.log_beta(t + 1, s + 2) + log_probs(t + 1, ext[s + 2]));
      }
      lat.log_beta(t, s) = acc;
    }
  }

  lat.log_likelihood = lat.log_alpha(steps - 1, states - 1);
  if (states > 1) {
    lat.log_likelihood = log_sum_exp(lat.log_likelihood, lat.log_alpha(steps - 1, states - 2));
  }
  return lat;
}

CtcResult ctc_forward_backward(const MatrixD& log_probs, const LabelSeq& labels) {
  CtcResult result;
  result.dlogits = MatrixD::Zero(log_probs.rows(), log_probs.cols());
  if (log_probs.rows() < min_frames(labels)) {
    check_distribution(log_probs);
    check_labels(labels, blank_of(log_probs));
    result.neg_log_likelihood = std::numeric_limits<double>::infinity();
    result.feasible = false;
    return result;
  }
  const CtcLattice lat = ctc_lattice(log_probs, labels);
  if (lat.log_likelihood == kLogZero) {
    result.neg_log_likelihood = std::numeric_limits<double>::infinity();
    result.feasible = false;
    return result;
  }
  result.neg_log_likelihood = -lat.log_likelihood;

  const int32_t blank = blank_of(log_probs);
  const LabelSeq ext = extend_with_blanks(labels, blank);
  const auto classes = log_probs.cols();
  std::vector<double> occupancy(static_cast<size_t>(classes));
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kLogZero);
    for (size_t s = 0; s < ext.size(); ++s) {
      const auto si = static_cast<Eigen::Index>(s);
      occupancy[ext[s]] = log_sum_exp(occupancy[ext[s]], lat.log_alpha(t, si) + lat.log_beta(t, si));
    }
    for (Eigen::Index k = 0; k < classes; ++k) {
      result.dlogits(t, k) = std::exp(log_probs(t, k)) -
                             std::exp(occupancy[static_cast<size_t>(k)] - lat.log_likelihood);
    }
  }
  return result;
}

LabelSeq collapse_path(const std::vector<int32_t>& path, int32_t blank) {
  LabelSeq out;
  int32_t prev = -1;
  for (int32_t k : path) {
    if (k != prev && k != blank) out.push_back(k);
    prev = k;
  }
  return out;
}

double ctc_loss_bruteforce(const MatrixD& log_probs, const LabelSeq& labels) {
  check_enumerable(log_probs);
  const int32_t blank = blank_of(log_probs);
  double total = kLogZero;
  for_each_path(log_probs, [&](const std::vector<int32_t>& path, double lp) {
    if (collapse_path(path, blank) == labels) total = log_sum_exp(total, lp);
  });
  return -total;
}

std::pair<LabelSeq, double> exhaustive_map_decode(const MatrixD& log_probs) {
  check_enumerable(log_probs);
  const int32_t blank = blank_of(log_probs);
  std::map<LabelSeq, double> classes;
  for_each_path(log_probs, [&](const std::vector<int32_t>& path, double lp) {
    auto [it, inserted] = classes.try_emplace(collapse_path(path, blank), lp);
    if (!inserted) it->second = log_sum_exp(it->second, lp);
  });
  // std::map iterates lexicographically, so strict > keeps the smaller prefix on ties.
  auto best = classes.begin();
  for (auto it = classes.begin(); it != classes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return {best->first, best->second};
}

LabelSeq greedy_decode(const MatrixD& log_probs) {
  std::vector<int32_t> path(static_cast<size_t>(log_probs.rows()));
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < log_probs.cols(); ++k) {
      if (log_probs(t, k) > log_probs(t, best)) best = k;
    }
    path[static_cast<size_t>(t)] = static_cast<int32_t>(best);
  }
  return collapse_path(path, blank_of(log_probs));
}

LabelSeq beam_search_decode(const MatrixD& log_probs, int beam_width) {
  if (beam_width < 1) throw UsageError("beam width must be at least 1");
  const int32_t blank = blank_of(log_probs);
  struct Score {
    double blank = kLogZero;  // prefix probability over paths ending in blank
    double label = kLogZero;  // ... ending in the prefix's last label
    double total() const { return log_sum_exp(blank, label); }
  };
  using Beam = std::map<LabelSeq, Score>;

  auto prune = [beam_width](const Beam& candidates) {
    std::vector<std::pair<LabelSeq, Score>> ranked(candidates.begin(), candidates.end());
    // Input is lexicographically ordered; stable_sort keeps that for ties.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second.total() > b.second.total();
    });
    if (ranked.size() > static_cast<size_t>(beam_width)) ranked.resize(static_cast<size_t>(beam_width));
    return Beam(ranked.begin(), ranked.end());
  };

  Beam beam;
  beam[LabelSeq{}].blank = 0.0;
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    Beam next;
    for (const auto& [prefix, score] : beam) {
      const double prefix_total = score.total();
      Score& same = next[prefix];
      same.blank = log_sum_exp(same.blank, prefix_total + log_probs(t, blank));
      for (int32_t k = 0; k < blank; ++k) {
        const double lp = log_probs(t, k);
        if (!prefix.empty() && prefix.back() == k) {
          // Repeat without a blank in between stays on the same prefix.
          Score& stay = next[prefix];
          stay.label = log_sum_exp(stay.label, score.label + lp);
          LabelSeq extended = prefix;
          extended.push_back(k);
          Score& grow = next[extended];
          grow.label = log_sum_exp(grow.label, score.blank + lp);
        } else {
          LabelSeq extended = prefix;
          extended.push_back(k);
          Score& grow = next[extended];
          grow.label = log_sum_exp(grow.label, prefix_total + lp);
        }
      }
    }
    for (auto it = next.begin(); it != next.end();) {
      it = it->second.total() == kLogZero ? next.erase(it) : std::next(it);
    }
    beam = prune(next);
  }
  // The map is lexicographic, so the first strict maximum wins ties.
  auto best = beam.begin();
  for (auto it = beam.begin(); it != beam.end(); ++it) {
    if (it->second.total() > best->second.total()) best = it;
  }
  return best->first;
}

int edit_distance(const LabelSeq& a, const LabelSeq& b) {
  std::vector<int> row(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double label_error_rate(const LabelSeq& ref, const LabelSeq& hyp) {
  if (ref.empty()) throw UsageError("label error rate is undefined for an empty reference");
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

double corpus_ler(const std::vector<std::pair<LabelSeq, LabelSeq>>& pairs) {
  long long errors = 0;
  long long length = 0;
  for (const auto& [ref, hyp] : pairs) {
    errors += edit_distance(ref, hyp);
    length += static_cast<long long>(ref.size());
  }
  if (length == 0) throw UsageError("corpus LER needs at least one reference label");
  return static_cast<double>(errors) / static_cast<double>(length);
}

}  // namespace ctcx
