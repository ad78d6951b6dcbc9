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

#include "network.hpp"

#include <cmath>

#include "rng.hpp"

namespace ctcx {

namespace {

const char* direction_name(int d) { return d == 0 ? "fwd" : "bwd"; }

std::string layer_tensor_name(int layer, int direction, const char* what) {
  return "layer" + std::to_string(layer + 1) + "." + direction_name(direction) + "." + what;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Mat<Scalar> dropout_mask(uint64_t seed, int layer, Eigen::Index rows, Eigen::Index cols,
                         double keep) {
  Rng rng(mix_seed(seed, static_cast<uint64_t>(layer) + 1));
  Mat<Scalar> mask(rows, cols);
  const auto scale = static_cast<Scalar>(1.0 / keep);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < keep ? scale : Scalar(0);
  }
  return mask;
}

// One direction over the whole sequence. reverse=true walks t = T-1 .. 0.
template <typename Scalar>
DirectionCache<Scalar> run_direction(const LstmLayerParams<Scalar>& p, const Mat<Scalar>& input,
                                     bool reverse) {
  const Eigen::Index steps = input.rows();
  const int h = p.hidden();
  Mat<Scalar> pre = input * p.w_input.transpose();
  pre.rowwise() += p.bias.transpose();

  DirectionCache<Scalar> c;
  c.gates.resize(steps, 4 * h);
  c.cell.resize(steps, h);
  c.hidden.resize(steps, h);
  Vec<Scalar> h_prev = Vec<Scalar>::Zero(h);
  Vec<Scalar> c_prev = Vec<Scalar>::Zero(h);
  Vec<Scalar> z(4 * h);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const Eigen::Index t = reverse ? steps - 1 - k : k;
    z.noalias() = p.w_recurrent * h_prev;
    z += pre.row(t).transpose();
    for (int j = 0; j < h; ++j) {
      const Scalar i_gate = sigmoid(z[j]);
      const Scalar f_gate = sigmoid(z[h + j]);
      const Scalar g_gate = std::tanh(z[2 * h + j]);
      const Scalar o_gate = sigmoid(z[3 * h + j]);
      const Scalar cell = f_gate * c_prev[j] + i_gate * g_gate;
      c.gates(t, j) = i_gate;
      c.gates(t, h + j) = f_gate;
      c.gates(t, 2 * h + j) = g_gate;
      c.gates(t, 3 * h + j) = o_gate;
      c.cell(t, j) = cell;
      c.hidden(t, j) = o_gate * std::tanh(cell);
    }
    h_prev = c.hidden.row(t).transpose();
    c_prev = c.cell.row(t).transpose();
  }
  return c;
}

// BPTT for one direction. Accumulates parameter gradients into `grad` and
// returns d loss / d input.
template <typename Scalar>
Mat<Scalar> backprop_direction(const LstmLayerParams<Scalar>& p, const DirectionCache<Scalar>& c,
                               const Mat<Scalar>& input, const Mat<Scalar>& d_hidden,
                               bool reverse, LstmLayerParams<Scalar>& grad) {
  const Eigen::Index steps = input.rows();
  const int h = p.hidden();
  Mat<Scalar> d_pre(steps, 4 * h);
  Mat<Scalar> h_prev_rows = Mat<Scalar>::Zero(steps, h);
  Vec<Scalar> dh_next = Vec<Scalar>::Zero(h);
  Vec<Scalar> dc_next = Vec<Scalar>::Zero(h);
  Vec<Scalar> dz(4 * h);
  for (Eigen::Index k = steps - 1; k >= 0; --k) {
    const Eigen::Index t = reverse ? steps - 1 - k : k;
    const bool has_prev = k > 0;
    const Eigen::Index t_prev = reverse ? t + 1 : t - 1;
    for (int j = 0; j < h; ++j) {
      const Scalar i_gate = c.gates(t, j);
      const Scalar f_gate = c.gates(t, h + j);
      const Scalar g_gate = c.gates(t, 2 * h + j);
      const Scalar o_gate = c.gates(t, 3 * h + j);
      const Scalar tanh_c = std::tanh(c.cell(t, j));
      const Scalar c_prev = has_prev ? c.cell(t_prev, j) : Scalar(0);
      const Scalar dh = d_hidden(t, j) + dh_next[j];
      const Scalar dc = dc_next[j] + dh * o_gate * (Scalar(1) - tanh_c * tanh_c);
      dz[j] = dc * g_gate * i_gate * (Scalar(1) - i_gate);
      dz[h + j] = dc * c_prev * f_gate * (Scalar(1) - f_gate);
      dz[2 * h + j] = dc * i_gate * (Scalar(1) - g_gate * g_gate);
      dz[3 * h + j] = dh * tanh_c * o_gate * (Scalar(1) - o_gate);
      dc_next[j] = dc * f_gate;
    }
    d_pre.row(t) = dz.transpose();
    if (has_prev) h_prev_rows.row(t) = c.hidden.row(t_prev);
    dh_next.noalias() = p.w_recurrent.transpose() * dz;
  }
  grad.w_input.noalias() += d_pre.transpose() * input;
  grad.w_recurrent.noalias() += d_pre.transpose() * h_prev_rows;
  grad.bias += d_pre.colwise().sum().transpose();
  return d_pre * p.w_input;
}

template <typename Scalar, typename Params>
auto collect_tensors(Params& params) {
  using Elem = std::conditional_t<std::is_const_v<Params>, const Scalar, Scalar>;
  std::vector<TensorView<Elem>> out;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    for (size_t d = 0; d < params.layers[l].size(); ++d) {
      auto& p = params.layers[l][d];
      const int li = static_cast<int>(l);
      const int di = static_cast<int>(d);
      out.push_back({layer_tensor_name(li, di, "w_input"), p.w_input.data(), p.w_input.rows(),
                     p.w_input.cols(), false});
      out.push_back({layer_tensor_name(li, di, "w_recurrent"), p.w_recurrent.data(),
                     p.w_recurrent.rows(), p.w_recurrent.cols(), false});
      out.push_back({layer_tensor_name(li, di, "bias"), p.bias.data(), p.bias.rows(), 1, true});
    }
  }
  out.push_back({"dense.w", params.dense_w.data(), params.dense_w.rows(), params.dense_w.cols(),
                 false});
  out.push_back({"dense.b", params.dense_b.data(), params.dense_b.rows(), 1, true});
  return out;
}

template <typename Scalar>
void check_features(const ModelConfig& cfg, const Mat<Scalar>& features) {
  if (features.rows() < 1) throw UsageError("forward: sequence has no frames");
  if (features.cols() != cfg.feature_dim) {
    throw DataError("forward: features have " + std::to_string(features.cols()) +
                    " columns, model expects " + std::to_string(cfg.feature_dim));
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden <= 0) throw UsageError("model config: hidden must be positive");
  if (num_layers <= 0) throw UsageError("model config: num_layers must be positive");
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) {
    throw UsageError("model config: dropout_keep must be in (0, 1]");
  }
  if (feature_dim <= 0) throw UsageError("model config: feature_dim must be positive");
  if (num_classes < 2) throw UsageError("model config: need at least 2 output classes");
}

std::vector<std::string> tensor_names(const ModelConfig& cfg) {
  std::vector<std::string> names;
  for (int l = 0; l < cfg.num_layers; ++l) {
    for (int d = 0; d < cfg.directions(); ++d) {
      for (const char* what : {"w_input", "w_recurrent", "bias"}) {
        names.push_back(layer_tensor_name(l, d, what));
      }
    }
  }
  names.emplace_back("dense.w");
  names.emplace_back("dense.b");
  return names;
}

std::pair<int, int> tensor_shape(const ModelConfig& cfg, const std::string& name) {
  const int h = cfg.hidden;
  if (name == "dense.w") return {cfg.num_classes, cfg.output_width()};
  if (name == "dense.b") return {cfg.num_classes, 1};
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int d_in = l == 0 ? cfg.feature_dim : cfg.output_width();
    for (int d = 0; d < cfg.directions(); ++d) {
      if (name == layer_tensor_name(l, d, "w_input")) return {4 * h, d_in};
      if (name == layer_tensor_name(l, d, "w_recurrent")) return {4 * h, h};
      if (name == layer_tensor_name(l, d, "bias")) return {4 * h, 1};
    }
  }
  throw DataError("unknown tensor name '" + name + "' for this architecture");
}

bool is_recurrent_tensor(const std::string& name) { return name.rfind("layer", 0) == 0; }

template <typename Scalar>
std::vector<TensorView<Scalar>> BasicModelParams<Scalar>::tensors() {
  return collect_tensors<Scalar>(*this);
}

template <typename Scalar>
std::vector<TensorView<const Scalar>> BasicModelParams<Scalar>::tensors() const {
  return collect_tensors<Scalar>(*this);
}

template <typename Scalar>
BasicModelParams<Scalar> BasicModelParams<Scalar>::zeros_like() const {
  BasicModelParams out = *this;
  for (auto& view : out.tensors()) {
    std::fill(view.data, view.data + view.size(), Scalar(0));
  }
  return out;
}

template <typename Scalar>
void BasicModelParams<Scalar>::check_shapes(const ModelConfig& cfg) const {
  if (layers.size() != static_cast<size_t>(cfg.num_layers)) {
    throw DataError("model has " + std::to_string(layers.size()) + " layers, config says " +
                    std::to_string(cfg.num_layers));
  }
  for (const auto& layer : layers) {
    if (layer.size() != static_cast<size_t>(cfg.directions())) {
      throw DataError("layer direction count does not match config");
    }
  }
  for (const auto& view : tensors()) {
    const auto [rows, cols] = tensor_shape(cfg, view.name);
    if (view.rows != rows || view.cols != cols) {
      throw DataError("tensor '" + view.name + "' has shape " + std::to_string(view.rows) + "x" +
                      std::to_string(view.cols) + ", expected " + std::to_string(rows) + "x" +
                      std::to_string(cols));
    }
  }
}

void init_tensor(const ModelConfig& cfg, const std::string& name, TensorView<float> view) {
  const auto [rows, cols] = tensor_shape(cfg, name);
  if (view.rows != rows || view.cols != cols) {
    throw DataError("init_tensor: view shape does not match '" + name + "'");
  }
  if (view.is_vector) {
    std::fill(view.data, view.data + view.size(), 0.0f);
    if (name != "dense.b") {
      // Forget-gate block of an LSTM bias.
      const int h = cfg.hidden;
      std::fill(view.data + h, view.data + 2 * h, 1.0f);
    }
    return;
  }
  // Glorot: fan_in = columns, fan_out = rows.
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Rng rng(hash64(name, cfg.seed));
  for (Eigen::Index i = 0; i < view.size(); ++i) {
    view.data[i] = static_cast<float>(rng.uniform(-limit, limit));
  }
}

ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  const int h = cfg.hidden;
  p.layers.resize(static_cast<size_t>(cfg.num_layers));
  for (int l = 0; l < cfg.num_layers; ++l) {
    const int d_in = l == 0 ? cfg.feature_dim : cfg.output_width();
    for (int d = 0; d < cfg.directions(); ++d) {
      p.layers[l].push_back({Mat<float>(4 * h, d_in), Mat<float>(4 * h, h), Vec<float>(4 * h)});
    }
  }
  p.dense_w.resize(cfg.num_classes, cfg.output_width());
  p.dense_b.resize(cfg.num_classes);
  for (auto& view : p.tensors()) init_tensor(cfg, view.name, view);
  return p;
}

template <typename Scalar>
ForwardResult<Scalar> forward(const BasicModelParams<Scalar>& params, const ModelConfig& cfg,
                              const Mat<Scalar>& features, bool train_mode,
                              uint64_t dropout_seed) {
  check_features(cfg, features);
  params.check_shapes(cfg);
  ForwardResult<Scalar> result;
  auto& cache = result.cache;
  cache.train_mode = train_mode;
  cache.hidden = cfg.hidden;
  cache.bidirectional = cfg.bidirectional;
  cache.feature_dim = cfg.feature_dim;
  cache.num_classes = cfg.num_classes;
  const Eigen::Index steps = features.rows();
  const int h = cfg.hidden;

  const Mat<Scalar>* input = &features;
  for (int l = 0; l < cfg.num_layers; ++l) {
    LayerCache<Scalar>& lc = cache.layers.emplace_back();
    lc.input = *input;
    lc.output.resize(steps, cfg.output_width());
    for (int d = 0; d < cfg.directions(); ++d) {
      lc.directions.push_back(run_direction(params.layers[l][d], lc.input, d == 1));
      lc.output.middleCols(d * h, h) = lc.directions.back().hidden;
    }
    if (train_mode && cfg.dropout_keep < 1.0) {
      lc.mask = dropout_mask<Scalar>(dropout_seed, l, steps, cfg.output_width(), cfg.dropout_keep);
      lc.dropped = lc.output.cwiseProduct(lc.mask);
    } else {
      lc.dropped = lc.output;
    }
    input = &lc.dropped;
  }
  result.logits = (*input) * params.dense_w.transpose();
  result.logits.rowwise() += params.dense_b.transpose();
  return result;
}

template <typename Scalar>
BasicModelParams<Scalar> backward(const BasicModelParams<Scalar>& params, const ModelConfig& cfg,
                                  const ForwardCache<Scalar>& cache,
                                  const Mat<Scalar>& dlogits) {
  if (!cache.train_mode) throw UsageError("backward: cache comes from an eval-mode forward");
  if (cache.hidden != cfg.hidden || cache.bidirectional != cfg.bidirectional ||
      cache.feature_dim != cfg.feature_dim || cache.num_classes != cfg.num_classes ||
      cache.layers.size() != static_cast<size_t>(cfg.num_layers)) {
    throw UsageError("backward: cache was produced for a different model configuration");
  }
  params.check_shapes(cfg);
  const Eigen::Index steps = cache.layers.front().input.rows();
  if (dlogits.rows() != steps || dlogits.cols() != cfg.num_classes) {
    throw UsageError("backward: dlogits shape does not match the cached forward pass");
  }
  const int h = cfg.hidden;

  BasicModelParams<Scalar> grad = params.zeros_like();
  const Mat<Scalar>& top = cache.layers.back().dropped;
  grad.dense_w.noalias() = dlogits.transpose() * top;
  grad.dense_b = dlogits.colwise().sum().transpose();
  Mat<Scalar> d_dropped = dlogits * params.dense_w;

  for (int l = cfg.num_layers - 1; l >= 0; --l) {
    const LayerCache<Scalar>& lc = cache.layers[l];
    const Mat<Scalar> d_output = lc.mask.size() > 0 ? Mat<Scalar>(d_dropped.cwiseProduct(lc.mask))
                                                    : d_dropped;
    Mat<Scalar> d_input = Mat<Scalar>::Zero(steps, lc.input.cols());
    for (int d = 0; d < cfg.directions(); ++d) {
      const Mat<Scalar> d_hidden = d_output.middleCols(d * h, h);
      d_input += backprop_direction(params.layers[l][d], lc.directions[d], lc.input, d_hidden,
                                    d == 1, grad.layers[l][d]);
    }
    d_dropped = std::move(d_input);
  }
  return grad;
}

MatrixD log_softmax(const MatrixD& logits) {
  MatrixD out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    out.row(t) = logits.row(t).array() - lse;
  }
  return out;
}

template struct BasicModelParams<float>;
template struct BasicModelParams<double>;
template ForwardResult<float> forward(const BasicModelParams<float>&, const ModelConfig&,
                                      const Mat<float>&, bool, uint64_t);
template ForwardResult<double> forward(const BasicModelParams<double>&, const ModelConfig&,
                                       const Mat<double>&, bool, uint64_t);
template BasicModelParams<float> backward(const BasicModelParams<float>&, const ModelConfig&,
                                          const ForwardCache<float>&, const Mat<float>&);
template BasicModelParams<double> backward(const BasicModelParams<double>&, const ModelConfig&,
                                           const ForwardCache<double>&, const Mat<double>&);

}  // namespace ctcx
