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

#include "transfer.hpp"

#include <algorithm>
#include <cmath>

namespace ctcx {

namespace {

void require_same(const char* what, long long source, long long target) {
  if (source != target) {
    throw DataError(std::string("transfer: ") + what + " differs (source " +
                    std::to_string(source) + ", target " + std::to_string(target) + ")");
  }
}

ModelConfig with_classes(ModelConfig cfg, const ModelParams& params) {
  cfg.num_classes = static_cast<int>(params.dense_w.rows());
  return cfg;
}

}  // namespace

TransferResult transfer_weights(const Checkpoint& source, const ModelConfig& target_cfg,
                                const Alphabet& target_alphabet, uint64_t seed) {
  const ModelConfig& src = source.config;
  require_same("hidden size", src.hidden, target_cfg.hidden);
  require_same("layer count", src.num_layers, target_cfg.num_layers);
  require_same("direction count", src.directions(), target_cfg.directions());
  require_same("feature dimension", src.feature_dim, target_cfg.feature_dim);
  require_same("target class count vs alphabet", target_cfg.num_classes, target_alphabet.num_classes());

  TransferResult result;
  result.config = target_cfg;
  result.config.num_classes = target_alphabet.num_classes();
  result.config.seed = seed;
  result.config.validate();

  TransferReport& report = result.report;
  report.source_alphabet = source.alphabet_name;
  report.target_alphabet = target_alphabet.name();
  report.source_classes = src.num_classes;
  report.target_classes = result.config.num_classes;

  // Validate every recurrent tensor before producing anything.
  const std::vector<std::string> names = tensor_names(result.config);
  for (const auto& name : names) {
    if (!is_recurrent_tensor(name)) continue;
    const CheckpointTensor* t = source.find(name);
    if (t == nullptr) throw DataError("transfer: source checkpoint lacks tensor '" + name + "'");
    const auto [rows, cols] = tensor_shape(result.config, name);
    if (static_cast<int64_t>(t->data.size()) != static_cast<int64_t>(rows) * cols) {
      throw DataError("transfer: tensor '" + name + "' has " + std::to_string(t->data.size()) +
                      " values, target expects " + std::to_string(rows * cols));
    }
    if (!std::all_of(t->data.begin(), t->data.end(), [](float v) { return std::isfinite(v); })) {
      throw DataError("transfer: tensor '" + name + "' holds a non-finite value");
    }
  }

  result.params.layers.resize(static_cast<size_t>(result.config.num_layers));
  for (int l = 0; l < result.config.num_layers; ++l) {
    const int d_in = l == 0 ? result.config.feature_dim : result.config.output_width();
    const int h = result.config.hidden;
    for (int d = 0; d < result.config.directions(); ++d) {
      result.params.layers[l].push_back(
          {Mat<float>(4 * h, d_in), Mat<float>(4 * h, h), Vec<float>(4 * h)});
    }
  }
  result.params.dense_w.resize(result.config.num_classes, result.config.output_width());
  result.params.dense_b.resize(result.config.num_classes);

  const std::string reason =
      report.source_classes != report.target_classes
          ? "output dimension mismatch: source " + std::to_string(report.source_classes) +
                " ≠ target " + std::to_string(report.target_classes)
          : "output layer is always reinitialized (source " +
                std::to_string(report.source_classes) + " = target " +
                std::to_string(report.target_classes) + ")";
  for (auto& view : result.params.tensors()) {
    if (is_recurrent_tensor(view.name)) {
      const CheckpointTensor& t = source.at(view.name);
      std::copy(t.data.begin(), t.data.end(), view.data);
      report.copied.push_back(view.name);
    } else {
      init_tensor(result.config, view.name, view);
      report.reinitialized.push_back(view.name);
      report.skipped_reason[view.name] = reason;
    }
  }
  return result;
}

VerifyReport verify_transfer(const ModelParams& source, const ModelParams& transferred,
                             const ModelConfig& cfg, const std::vector<Mat<float>>& probes,
                             VerifyMode mode) {
  const ModelConfig source_cfg = with_classes(cfg, source);
  const ModelConfig target_cfg = with_classes(cfg, transferred);
  source.check_shapes(source_cfg);
  transferred.check_shapes(target_cfg);

  VerifyReport report;
  report.layer_deviation.assign(static_cast<size_t>(cfg.num_layers), 0.0);

  const auto src_views = source.tensors();
  const auto dst_views = transferred.tensors();
  for (size_t i = 0; i < src_views.size(); ++i) {
    if (!is_recurrent_tensor(src_views[i].name)) continue;
    if (!std::equal(src_views[i].data, src_views[i].data + src_views[i].size(), dst_views[i].data)) {
      report.first_divergence = src_views[i].name;
      break;
    }
  }

  for (const auto& probe : probes) {
    const auto a = forward(source, source_cfg, probe, false, 0);
    const auto b = forward(transferred, target_cfg, probe, false, 0);
    for (int l = 0; l < cfg.num_layers; ++l) {
      const double dev = (a.cache.layers[l].output - b.cache.layers[l].output)
                             .cwiseAbs()
                             .template cast<double>()
                             .maxCoeff();
      report.layer_deviation[l] = std::max(report.layer_deviation[l], dev);
      report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
    }
  }
  if (report.first_divergence.empty() && report.max_abs_deviation > 0.0) {
    for (int l = 0; l < cfg.num_layers; ++l) {
      if (report.layer_deviation[l] > 0.0) {
        report.first_divergence = "layer" + std::to_string(l + 1);
        break;
      }
    }
  }

  if (mode == VerifyMode::kStrict && !report.identical()) {
    throw TransferVerificationError(
        report.first_divergence,
        "transfer verification failed: first divergence in '" + report.first_divergence +
            "', max |deviation| = " + std::to_string(report.max_abs_deviation));
  }
  return report;
}

}  // namespace ctcx
