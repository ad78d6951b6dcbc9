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

#include <filesystem>
#include <fstream>

#include "checkpoint.hpp"
#include "oracles.hpp"
#include "transfer.hpp"

using namespace ctcx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ctcx_ckpt_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

ModelConfig config(bool bi, const Alphabet& a, int hidden = 8) {
  ModelConfig cfg;
  cfg.hidden = hidden;
  cfg.bidirectional = bi;
  cfg.feature_dim = 13;
  cfg.num_classes = a.num_classes();
  cfg.seed = 5;
  return cfg;
}

std::vector<char> bytes_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::string& path, const std::vector<char>& b) {
  std::ofstream(path, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
}

CheckpointError::Reason reason_of(const std::string& path) {
  try {
    read_checkpoint(path);
  } catch (const CheckpointError& e) {
    return e.reason();
  }
  FAIL("expected CheckpointError");
  return CheckpointError::Reason::kOpen;
}

std::vector<Mat<float>> probes(int n) {
  Rng rng(77);
  std::vector<Mat<float>> out;
  for (int i = 0; i < n; ++i) {
    Mat<float> m(6 + i, 13);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<float>(rng.normal());
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  TempDir dir;
  const Alphabet kk = builtin_alphabet("kk");
  for (bool bi : {false, true}) {
    const ModelConfig cfg = config(bi, kk);
    const ModelParams p = init_params(cfg);
    save_checkpoint(p, cfg, kk, dir / "m.ctcx");
    const LoadedModel m = load_checkpoint(dir / "m.ctcx", cfg);
    CHECK(m.alphabet_name == "kk");
    REQUIRE(m.alphabet.has_value());
    CHECK(*m.alphabet == kk);
    CHECK(m.config.bidirectional == bi);
    const auto a = p.tensors();
    const auto b = m.params.tensors();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(std::memcmp(a[i].data, b[i].data, sizeof(float) * a[i].size()) == 0);
    }
    CHECK_FALSE(fs::exists(dir / "m.ctcx.tmp"));
  }
}

TEST_CASE("checkpoint layout: magic, version and aligned payload") {
  TempDir dir;
  const Alphabet ru = builtin_alphabet("ru");
  const ModelConfig cfg = config(true, ru);
  save_checkpoint(init_params(cfg), cfg, ru, dir / "m.ctcx");
  const auto b = bytes_of(dir / "m.ctcx");
  CHECK(std::string(b.begin(), b.begin() + 4) == "CTCX");
  CHECK(b[4] == 1);
  const Checkpoint ck = read_checkpoint(dir / "m.ctcx");
  CHECK(ck.tensors.size() == 14);
  CHECK(ck.at("dense.w").shape == std::vector<int64_t>{35, 16});
  CHECK(ck.find("nope") == nullptr);
}

TEST_CASE("corrupt checkpoints fail with specific reasons") {
  TempDir dir;
  const Alphabet kk = builtin_alphabet("kk");
  const ModelConfig cfg = config(false, kk);
  save_checkpoint(init_params(cfg), cfg, kk, dir / "good.ctcx");
  const auto good = bytes_of(dir / "good.ctcx");

  CHECK(reason_of(dir / "absent.ctcx") == CheckpointError::Reason::kOpen);

  auto bad = good;
  bad[0] = 'X';
  write_bytes(dir / "magic.ctcx", bad);
  CHECK(reason_of(dir / "magic.ctcx") == CheckpointError::Reason::kMagic);

  bad = good;
  bad[4] = 9;
  write_bytes(dir / "version.ctcx", bad);
  CHECK(reason_of(dir / "version.ctcx") == CheckpointError::Reason::kVersion);

  bad = good;
  bad[16] = '[';
  write_bytes(dir / "header.ctcx", bad);
  CHECK(reason_of(dir / "header.ctcx") == CheckpointError::Reason::kHeader);

  bad.assign(good.begin(), good.end() - 100);
  write_bytes(dir / "trunc.ctcx", bad);
  CHECK(reason_of(dir / "trunc.ctcx") == CheckpointError::Reason::kTruncated);

  // Shape mismatch against an expected config names the tensor.
  ModelConfig other = cfg;
  other.hidden = 6;
  try {
    load_checkpoint(dir / "good.ctcx", other);
    FAIL("expected shape error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("layer1.fwd.w_input") != std::string::npos);
  }
}

TEST_CASE("ru to kk BiLSTM transfer partitions the tensors") {
  const Alphabet ru = builtin_alphabet("ru");
  const Alphabet kk = builtin_alphabet("kk");
  ModelConfig src_cfg = config(true, ru, 128);
  const Checkpoint src = make_checkpoint(init_params(src_cfg), src_cfg, ru);
  ModelConfig tgt_cfg = src_cfg;
  tgt_cfg.num_classes = kk.num_classes();
  const TransferResult tr = transfer_weights(src, tgt_cfg, kk, 3);
  CHECK(tr.report.copied.size() == 12);
  CHECK(tr.report.reinitialized == std::vector<std::string>{"dense.w", "dense.b"});
  CHECK(tr.report.source_classes == 35);
  CHECK(tr.report.target_classes == 44);
  CHECK(tr.params.dense_w.rows() == 44);
  CHECK(tr.params.dense_w.cols() == 256);
  CHECK(tr.report.skipped_reason.at("dense.w").find("35") != std::string::npos);
  // Partition: every canonical tensor appears exactly once.
  std::vector<std::string> all = tr.report.copied;
  all.insert(all.end(), tr.report.reinitialized.begin(), tr.report.reinitialized.end());
  CHECK(all == tensor_names(tr.config));
  const VerifyReport vr = verify_transfer(params_from_checkpoint(src), tr.params, tr.config, probes(5));
  CHECK(vr.identical());
}

TEST_CASE("transfer ignores the source dense head entirely") {
  const Alphabet ru = builtin_alphabet("ru");
  const Alphabet kk = builtin_alphabet("kk");
  const ModelConfig cfg = config(false, ru);
  Checkpoint a = make_checkpoint(init_params(cfg), cfg, ru);
  Checkpoint b = a;
  for (auto& t : b.tensors) {
    if (t.name.rfind("dense.", 0) == 0) std::fill(t.data.begin(), t.data.end(), 1e30f);
  }
  ModelConfig tgt = cfg;
  tgt.num_classes = kk.num_classes();
  const TransferResult ta = transfer_weights(a, tgt, kk, 9);
  const TransferResult tb = transfer_weights(b, tgt, kk, 9);
  CHECK(ta.params.dense_w == tb.params.dense_w);
  CHECK(ta.params.dense_b == tb.params.dense_b);
}

TEST_CASE("architectural mismatches are rejected") {
  const Alphabet ru = builtin_alphabet("ru");
  const Alphabet kk = builtin_alphabet("kk");
  const ModelConfig cfg = config(true, ru);
  const Checkpoint src = make_checkpoint(init_params(cfg), cfg, ru);
  ModelConfig tgt = cfg;
  tgt.num_classes = kk.num_classes();
  ModelConfig wrong = tgt;
  wrong.hidden = 16;
  CHECK_THROWS_AS(transfer_weights(src, wrong, kk, 1), DataError);
  wrong = tgt;
  wrong.bidirectional = false;
  CHECK_THROWS_AS(transfer_weights(src, wrong, kk, 1), DataError);
  wrong = tgt;
  wrong.feature_dim = 20;
  CHECK_THROWS_AS(transfer_weights(src, wrong, kk, 1), DataError);
  wrong = tgt;
  wrong.num_classes = 10;
  CHECK_THROWS_AS(transfer_weights(src, wrong, kk, 1), Error);
}

TEST_CASE("same-alphabet transfer verifies with zero deviation") {
  const Alphabet kk = builtin_alphabet("kk");
  const ModelConfig cfg = config(true, kk);
  const Checkpoint src = make_checkpoint(init_params(cfg), cfg, kk);
  const TransferResult tr = transfer_weights(src, cfg, kk, 2);
  CHECK(tr.report.copied.size() == 12);
  CHECK(tr.report.reinitialized.size() == 2);
  const VerifyReport vr = verify_transfer(params_from_checkpoint(src), tr.params, cfg, probes(3));
  CHECK(vr.max_abs_deviation == 0.0);
}

TEST_CASE("verification names the first perturbed tensor") {
  const Alphabet kk = builtin_alphabet("kk");
  const ModelConfig cfg = config(true, kk);
  const ModelParams src = init_params(cfg);
  ModelParams bad = src;
  bad.layers[1][0].w_recurrent(0, 0) += 1e-3f;
  try {
    verify_transfer(src, bad, cfg, probes(2));
    FAIL("expected TransferVerificationError");
  } catch (const TransferVerificationError& e) {
    CHECK(e.first_divergence() == "layer2.fwd.w_recurrent");
  }
  const VerifyReport vr = verify_transfer(src, bad, cfg, probes(2), VerifyMode::kPostTraining);
  CHECK(vr.first_divergence == "layer2.fwd.w_recurrent");
  CHECK(vr.max_abs_deviation > 0.0);
  CHECK(vr.layer_deviation.at(0) == 0.0);
  CHECK(vr.layer_deviation.at(1) > 0.0);
}
