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

#include "error.hpp"
#include "matrix.hpp"

namespace ctcx {

struct ModelConfig {
  int hidden = 128;
  int num_layers = 2;
  bool bidirectional = false;
  double dropout_keep = 0.5;
  int feature_dim = 13;
  int num_classes = 0;
  uint64_t seed = 0;

  int directions() const { return bidirectional ? 2 : 1; }
  // Width of every layer's output: H, or 2H when bidirectional.
  int output_width() const { return hidden * directions(); }
  void validate() const;
};

// One direction of one LSTM layer. Gate blocks are stacked [i, f, g, o],
// each H rows.
template <typename Scalar>
struct LstmLayerParams {
  Mat<Scalar> w_input;      // 4H x D
  Mat<Scalar> w_recurrent;  // 4H x H
  Vec<Scalar> bias;         // 4H

  int hidden() const { return static_cast<int>(w_recurrent.cols()); }
  int input_dim() const { return static_cast<int>(w_input.cols()); }
};

// A named, shaped view onto one parameter tensor. Vectors have cols == 1.
template <typename Scalar>
struct TensorView {
  std::string name;
  Scalar* data;
  Eigen::Index rows;
  Eigen::Index cols;
  bool is_vector;

  Eigen::Index size() const { return rows * cols; }
};

template <typename Scalar>
struct BasicModelParams {
  // layers[l][d]: layer l (0-based), direction d (0 forward, 1 backward).
  std::vector<std::vector<LstmLayerParams<Scalar>>> layers;
  Mat<Scalar> dense_w;  // C x R
  Vec<Scalar> dense_b;  // C

  // Every tensor in canonical order:
  // layer{1,2}.{fwd,bwd}.{w_input,w_recurrent,bias}, dense.w, dense.b.
  std::vector<TensorView<Scalar>> tensors();
  std::vector<TensorView<const Scalar>> tensors() const;

  // Same shapes, all zeros.
  BasicModelParams zeros_like() const;

  template <typename Other>
  BasicModelParams<Other> cast() const {
    BasicModelParams<Other> out;
    out.layers.resize(layers.size());
    for (size_t l = 0; l < layers.size(); ++l) {
      for (const auto& p : layers[l]) {
        out.layers[l].push_back({p.w_input.template cast<Other>(),
                                 p.w_recurrent.template cast<Other>(),
                                 p.bias.template cast<Other>()});
      }
    }
    out.dense_w = dense_w.template cast<Other>();
    out.dense_b = dense_b.template cast<Other>();
    return out;
  }

  // Throws DataError naming the first tensor whose shape disagrees with cfg.
  void check_shapes(const ModelConfig& cfg) const;
};

using ModelParams = BasicModelParams<float>;

// Names in canonical order for a given architecture.
std::vector<std::string> tensor_names(const ModelConfig& cfg);
// Expected {rows, cols} of a named tensor (cols == 1 for vectors).
std::pair<int, int> tensor_shape(const ModelConfig& cfg, const std::string& name);
bool is_recurrent_tensor(const std::string& name);

// Glorot-uniform weights, zero biases except the forget-gate block (1.0).
// Each tensor draws from its own stream keyed by (seed, name), so a tensor's
// initial value does not depend on which other tensors exist.
ModelParams init_params(const ModelConfig& cfg);
// Initializes one named tensor in place, as init_params would.
void init_tensor(const ModelConfig& cfg, const std::string& name, TensorView<float> view);

template <typename Scalar>
struct DirectionCache {
  Mat<Scalar> gates;   // T x 4H, post-activation, natural time order
  Mat<Scalar> cell;    // T x H
  Mat<Scalar> hidden;  // T x H
};

template <typename Scalar>
struct LayerCache {
  Mat<Scalar> input;    // T x D
  std::vector<DirectionCache<Scalar>> directions;
  Mat<Scalar> output;   // T x R, before dropout
  Mat<Scalar> mask;     // T x R inverted-dropout mask; empty when unused
  Mat<Scalar> dropped;  // T x R, what the next layer sees
};

template <typename Scalar>
struct ForwardCache {
  std::vector<LayerCache<Scalar>> layers;
  bool train_mode = false;
  int hidden = 0;
  bool bidirectional = false;
  int feature_dim = 0;
  int num_classes = 0;
};

template <typename Scalar>
struct ForwardResult {
  Mat<Scalar> logits;  // T x C, pre-softmax
  ForwardCache<Scalar> cache;
};

// Runs the recurrent stack and the dense head. Dropout (inverted, keep =
// cfg.dropout_keep) is applied after every LSTM layer in train mode only,
// with masks drawn from dropout_seed.
template <typename Scalar>
ForwardResult<Scalar> forward(const BasicModelParams<Scalar>& params, const ModelConfig& cfg,
                              const Mat<Scalar>& features, bool train_mode,
                              uint64_t dropout_seed);

// Exact gradients of a scalar loss given d loss / d logits. The cache must
// come from a train-mode forward call with the same params.
template <typename Scalar>
BasicModelParams<Scalar> backward(const BasicModelParams<Scalar>& params, const ModelConfig& cfg,
                                  const ForwardCache<Scalar>& cache,
                                  const Mat<Scalar>& dlogits);

// Row-wise log-softmax with max subtraction.
MatrixD log_softmax(const MatrixD& logits);

}  // namespace ctcx
