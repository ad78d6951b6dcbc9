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

#include "ctc.hpp"
#include "network.hpp"
#include "oracles.hpp"

using namespace ctcx;

namespace {

ModelConfig small_config(bool bidirectional, double keep = 1.0) {
  ModelConfig cfg;
  cfg.hidden = 4;
  cfg.num_layers = 2;
  cfg.bidirectional = bidirectional;
  cfg.dropout_keep = keep;
  cfg.feature_dim = 3;
  cfg.num_classes = 4;
  cfg.seed = 17;
  return cfg;
}

Mat<double> random_features(Rng& rng, int T, int F) {
  Mat<double> x(T, F);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

// Loss = sum(W .* logits); d loss / d logits = W.
double weighted_loss(const BasicModelParams<double>& p, const ModelConfig& cfg,
                     const Mat<double>& x, const Mat<double>& w, uint64_t seed) {
  return forward(p, cfg, x, true, seed).logits.cwiseProduct(w).sum();
}

void check_gradients(const ModelConfig& cfg, uint64_t dropout_seed) {
  Rng rng(99);
  BasicModelParams<double> params = init_params(cfg).cast<double>();
  // Move biases off their init values so every gate is exercised.
  for (auto& view : params.tensors()) {
    for (Eigen::Index i = 0; i < view.size(); ++i) view.data[i] += 0.1 * rng.normal();
  }
  const Mat<double> x = random_features(rng, 5, cfg.feature_dim);
  const Mat<double> w = random_features(rng, 5, cfg.num_classes);
  const auto fr = forward(params, cfg, x, true, dropout_seed);
  const BasicModelParams<double> grads = backward(params, cfg, fr.cache, w);

  const double eps = 1e-5;
  auto views = params.tensors();
  const auto gviews = grads.tensors();
  for (size_t v = 0; v < views.size(); ++v) {
    CAPTURE(views[v].name);
    for (Eigen::Index i = 0; i < views[v].size(); ++i) {
      const double saved = views[v].data[i];
      views[v].data[i] = saved + eps;
      const double up = weighted_loss(params, cfg, x, w, dropout_seed);
      views[v].data[i] = saved - eps;
      const double down = weighted_loss(params, cfg, x, w, dropout_seed);
      views[v].data[i] = saved;
      const double fd = (up - down) / (2 * eps);
      const double an = gviews[v].data[i];
      CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

}  // namespace

TEST_CASE("parameter shapes and canonical order") {
  ModelConfig cfg = small_config(true);
  cfg.hidden = 128;
  cfg.feature_dim = 13;
  cfg.num_classes = 44;
  const auto names = tensor_names(cfg);
  REQUIRE(names.size() == 14);
  CHECK(names.front() == "layer1.fwd.w_input");
  CHECK(names[3] == "layer1.bwd.w_input");
  CHECK(names[12] == "dense.w");
  CHECK(names[13] == "dense.b");
  CHECK(tensor_shape(cfg, "layer1.fwd.w_input") == std::pair{512, 13});
  CHECK(tensor_shape(cfg, "layer2.bwd.w_input") == std::pair{512, 256});
  CHECK(tensor_shape(cfg, "layer2.fwd.w_recurrent") == std::pair{512, 128});
  CHECK(tensor_shape(cfg, "dense.w") == std::pair{44, 256});
  CHECK(is_recurrent_tensor("layer2.bwd.bias"));
  CHECK_FALSE(is_recurrent_tensor("dense.w"));

  cfg.bidirectional = false;
  CHECK(tensor_names(cfg).size() == 8);
  CHECK(tensor_shape(cfg, "layer2.fwd.w_input") == std::pair{512, 128});
  const ModelParams p = init_params(cfg);
  CHECK_NOTHROW(p.check_shapes(cfg));
}

TEST_CASE("initialization is deterministic with a unit forget bias") {
  const ModelConfig cfg = small_config(true);
  const ModelParams a = init_params(cfg);
  const ModelParams b = init_params(cfg);
  const auto va = a.tensors();
  const auto vb = b.tensors();
  for (size_t i = 0; i < va.size(); ++i) {
    CHECK(std::equal(va[i].data, va[i].data + va[i].size(), vb[i].data));
  }
  const int H = cfg.hidden;
  const auto& bias = a.layers[0][0].bias;
  for (int j = 0; j < 4 * H; ++j) CHECK(bias[j] == (j >= H && j < 2 * H ? 1.0f : 0.0f));
  const double limit = std::sqrt(6.0 / (4 * H + cfg.feature_dim));
  CHECK(a.layers[0][0].w_input.cwiseAbs().maxCoeff() <= limit);

  ModelConfig other = cfg;
  other.seed = 18;
  CHECK(init_params(other).layers[0][0].w_input != a.layers[0][0].w_input);
}

TEST_CASE("output shape and zero weights give uniform posteriors") {
  const ModelConfig cfg = small_config(false);
  ModelParams p = init_params(cfg);
  for (auto& v : p.tensors()) std::fill(v.data, v.data + v.size(), 0.0f);
  Rng rng(1);
  const Mat<float> x = random_features(rng, 7, 3).cast<float>();
  const auto fr = forward(p, cfg, x, false, 0);
  CHECK(fr.logits.rows() == 7);
  CHECK(fr.logits.cols() == 4);
  const MatrixD lp = log_softmax(fr.logits.cast<double>());
  CHECK((lp.array() + std::log(4.0)).abs().maxCoeff() < 1e-7);
}

TEST_CASE("eval mode ignores the dropout seed, train mode does not") {
  const ModelConfig cfg = small_config(true, 0.5);
  const ModelParams p = init_params(cfg);
  Rng rng(2);
  const Mat<float> x = random_features(rng, 6, 3).cast<float>();
  CHECK(forward(p, cfg, x, false, 1).logits == forward(p, cfg, x, false, 2).logits);
  CHECK(forward(p, cfg, x, true, 1).logits == forward(p, cfg, x, true, 1).logits);
  CHECK(forward(p, cfg, x, true, 1).logits != forward(p, cfg, x, true, 2).logits);
  const auto eval = forward(p, cfg, x, false, 0);
  CHECK_THROWS_AS(backward(p, cfg, eval.cache, eval.logits), UsageError);
}

TEST_CASE("inverted dropout keeps the expected activation") {
  const ModelConfig cfg = small_config(false, 0.5);
  const ModelParams p = init_params(cfg);
  Rng rng(6);
  const Mat<float> x = random_features(rng, 4, 3).cast<float>();
  const auto fr = forward(p, cfg, x, true, 123);
  const auto& mask = fr.cache.layers[0].mask;
  REQUIRE(mask.size() > 0);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    CHECK((mask.data()[i] == 0.0f || mask.data()[i] == 2.0f));
  }
}

TEST_CASE("BiLSTM with swapped directions mirrors a palindromic input") {
  const ModelConfig cfg = small_config(true);
  const ModelParams p = init_params(cfg);
  ModelParams swapped = p;
  std::swap(swapped.layers[0][0], swapped.layers[0][1]);
  Rng rng(12);
  Mat<float> x(7, 3);
  for (int t = 0; t < 4; ++t) {
    for (int f = 0; f < 3; ++f) x(t, f) = x(6 - t, f) = static_cast<float>(rng.normal());
  }
  const auto a = forward(p, cfg, x, false, 0).cache.layers[0].output;
  const auto b = forward(swapped, cfg, x, false, 0).cache.layers[0].output;
  const int H = cfg.hidden;
  for (int t = 0; t < 7; ++t) {
    for (int j = 0; j < H; ++j) {
      CHECK(b(t, j) == doctest::Approx(a(6 - t, H + j)).epsilon(1e-6));
      CHECK(b(t, H + j) == doctest::Approx(a(6 - t, j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("log_softmax reference values") {
  MatrixD logits(1, 3);
  logits << 1.0, 2.0, 3.0;
  const MatrixD p = log_softmax(logits).array().exp().matrix();
  CHECK(p(0, 0) == doctest::Approx(0.0900).epsilon(1e-3));
  CHECK(p(0, 1) == doctest::Approx(0.2447).epsilon(1e-3));
  CHECK(p(0, 2) == doctest::Approx(0.6652).epsilon(1e-3));
  MatrixD big(1, 2);
  big << 1000.0, 1000.0;
  CHECK(log_softmax(big)(0, 0) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("LSTM gradients match finite differences") { check_gradients(small_config(false), 0); }

TEST_CASE("BiLSTM gradients match finite differences") { check_gradients(small_config(true), 0); }

TEST_CASE("gradients with a fixed dropout mask match finite differences") {
  check_gradients(small_config(true, 0.7), 31);
}

TEST_CASE("end-to-end CTC gradient through the network") {
  const ModelConfig cfg = small_config(true);
  BasicModelParams<double> params = init_params(cfg).cast<double>();
  Rng rng(44);
  const Mat<double> x = random_features(rng, 5, 3);
  const LabelSeq labels = {0, 2};
  auto loss = [&](const BasicModelParams<double>& p) {
    return ctc_forward_backward(log_softmax(forward(p, cfg, x, true, 0).logits), labels)
        .neg_log_likelihood;
  };
  const auto fr = forward(params, cfg, x, true, 0);
  const CtcResult r = ctc_forward_backward(log_softmax(fr.logits), labels);
  const auto grads = backward(params, cfg, fr.cache, r.dlogits);
  auto views = params.tensors();
  const auto gviews = grads.tensors();
  for (size_t v = 0; v < views.size(); v += 3) {
    for (Eigen::Index i = 0; i < views[v].size(); i += 5) {
      const double saved = views[v].data[i];
      views[v].data[i] = saved + 1e-5;
      const double up = loss(params);
      views[v].data[i] = saved - 1e-5;
      const double down = loss(params);
      views[v].data[i] = saved;
      const double fd = (up - down) / 2e-5;
      CHECK(std::abs(fd - gviews[v].data[i]) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}
