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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "checkpoint.hpp"
#include "ctc.hpp"
#include "frontend.hpp"
#include "network.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "trainer.hpp"
#include "transfer.hpp"

using namespace ctcx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int precision = 3) {
  std::ostringstream os;
  if (v != 0.0 && (std::abs(v) < 1e-3 || std::abs(v) >= 1e5)) {
    os << std::scientific << std::setprecision(precision) << v;
  } else {
    os << std::fixed << std::setprecision(precision) << v;
  }
  return os.str();
}

struct Instance {
  MatrixD logits;
  MatrixD log_probs;
  LabelSeq labels;
};

// Shared instance set for criteria 1 and 3: T <= 6, C <= 3, |l| <= 3.
std::vector<Instance> small_instances(size_t count, uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> out;
  for (size_t i = 0; i < count; ++i) {
    Instance inst;
    const int T = 1 + static_cast<int>(rng.below(6));
    const int C = 2 + static_cast<int>(rng.below(2));
    inst.logits = oracle::random_logits(rng, T, C, 1.5);
    inst.log_probs = oracle::log_softmax_rows(inst.logits);
    inst.labels = oracle::random_labels(rng, 3, C - 1);
    out.push_back(std::move(inst));
  }
  return out;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto instances = small_instances(1200, 101);
  double worst = 0.0;
  int infeasible = 0;
  bool ok = true;
  for (const auto& inst : instances) {
    const double fb = ctc_forward_backward(inst.log_probs, inst.labels).neg_log_likelihood;
    const double bf = ctc_loss_bruteforce(inst.log_probs, inst.labels);
    const double naive = oracle::ctc_nll(inst.log_probs, inst.labels);
    if (std::isinf(bf) || std::isinf(naive)) {
      ++infeasible;
      ok = ok && std::isinf(fb) && std::isinf(bf) && std::isinf(naive);
      continue;
    }
    worst = std::max({worst, std::abs(fb - bf), std::abs(fb - naive)});
  }
  const double elapsed = seconds_since(t0);
  ok = ok && worst <= 1e-9 && elapsed < 10.0;
  return {ok, std::to_string(instances.size()) + " instances (" + std::to_string(infeasible) +
                  " infeasible), max |dlogL| " + num(worst) + ", " + num(elapsed, 2) + " s"};
}

Outcome criterion2() {
  Rng rng(202);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const int T = 2 + static_cast<int>(rng.below(5));
    const int C = 2 + static_cast<int>(rng.below(3));
    const MatrixD logits = oracle::random_logits(rng, T, C, 1.5);
    const LabelSeq labels = oracle::random_labels(rng, 3, C - 1);
    const CtcResult r = ctc_forward_backward(oracle::log_softmax_rows(logits), labels);
    if (!r.feasible) continue;
    ++done;
    const double eps = 1e-5;
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < C; ++k) {
        MatrixD up = logits;
        MatrixD down = logits;
        up(t, k) += eps;
        down(t, k) -= eps;
        const double fd =
            (ctc_forward_backward(oracle::log_softmax_rows(up), labels).neg_log_likelihood -
             ctc_forward_backward(oracle::log_softmax_rows(down), labels).neg_log_likelihood) /
            (2 * eps);
        const double an = r.dlogits(t, k);
        const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
        worst = std::max(worst, rel);
      }
    }
  }
  return {worst <= 1e-4, "100 instances, max relative error " + num(worst)};
}

Outcome criterion3() {
  const auto instances = small_instances(1200, 101);
  double worst = 0.0;
  int checked = 0;
  for (const auto& inst : instances) {
    if (min_frames(inst.labels) > inst.log_probs.rows()) continue;
    const CtcLattice lat = ctc_lattice(inst.log_probs, inst.labels);
    ++checked;
    for (Eigen::Index t = 0; t < lat.log_alpha.rows(); ++t) {
      double acc = kLogZero;
      for (Eigen::Index s = 0; s < lat.log_alpha.cols(); ++s) {
        acc = log_sum_exp(acc, lat.log_alpha(t, s) + lat.log_beta(t, s));
      }
      worst = std::max(worst, std::abs(acc - lat.log_likelihood));
    }
  }
  return {worst <= 1e-6, std::to_string(checked) + " feasible instances, max deviation " + num(worst)};
}

double network_gradient_error(bool bidirectional, uint64_t seed) {
  ModelConfig cfg;
  cfg.hidden = 4;
  cfg.bidirectional = bidirectional;
  cfg.dropout_keep = 0.8;
  cfg.feature_dim = 3;
  cfg.num_classes = 4;
  cfg.seed = seed;
  Rng rng(seed);
  BasicModelParams<double> params = init_params(cfg).cast<double>();
  for (auto& v : params.tensors()) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data[i] += 0.2 * rng.normal();
  }
  Mat<double> x(5, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const LabelSeq labels = oracle::random_labels(rng, 2, 3, 1);
  const uint64_t mask_seed = rng.next();
  auto loss = [&](const BasicModelParams<double>& p) {
    return ctc_forward_backward(log_softmax(forward(p, cfg, x, true, mask_seed).logits), labels)
        .neg_log_likelihood;
  };
  const auto fr = forward(params, cfg, x, true, mask_seed);
  const auto r = ctc_forward_backward(log_softmax(fr.logits), labels);
  const auto grads = backward(params, cfg, fr.cache, r.dlogits);
  auto views = params.tensors();
  const auto gviews = grads.tensors();
  double worst = 0.0;
  const double eps = 1e-5;
  for (size_t v = 0; v < views.size(); ++v) {
    for (Eigen::Index i = 0; i < views[v].size(); ++i) {
      const double saved = views[v].data[i];
      views[v].data[i] = saved + eps;
      const double up = loss(params);
      views[v].data[i] = saved - eps;
      const double down = loss(params);
      views[v].data[i] = saved;
      const double fd = (up - down) / (2 * eps);
      const double an = gviews[v].data[i];
      worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-5}));
    }
  }
  return worst;
}

Outcome criterion4() {
  double lstm = 0.0;
  double bilstm = 0.0;
  for (uint64_t seed : {1, 2, 3}) {
    lstm = std::max(lstm, network_gradient_error(false, seed));
    bilstm = std::max(bilstm, network_gradient_error(true, seed + 10));
  }
  return {lstm <= 1e-4 && bilstm <= 1e-4,
          "max relative error LSTM " + num(lstm) + ", BiLSTM " + num(bilstm) + " (3 instances each)"};
}

Outcome criterion5() {
  Rng rng(505);
  int beam_ok = 0;
  const int trials = 600;
  for (int i = 0; i < trials; ++i) {
    const int T = 1 + static_cast<int>(rng.below(5));
    const int C = 2 + static_cast<int>(rng.below(2));
    const MatrixD lp = oracle::random_log_probs(rng, T, C);
    const auto masses = oracle::class_masses(lp);
    const auto map = exhaustive_map_decode(lp);
    const LabelSeq beam = beam_search_decode(lp, static_cast<int>(masses.size()));
    if (beam == map.first && std::abs(std::exp(map.second) - masses.at(map.first)) < 1e-12) {
      ++beam_ok;
    }
  }
  // Every argmax path over T <= 4, C = 3 rendered as a peaked distribution.
  int greedy_total = 0;
  int greedy_ok = 0;
  for (int T = 1; T <= 4; ++T) {
    MatrixD probs = MatrixD::Constant(T, 3, 1.0 / 3.0);
    oracle::enumerate_paths(probs, [&](const std::vector<int>& path, double) {
      MatrixD lp = MatrixD::Constant(T, 3, std::log(0.15));
      for (int t = 0; t < T; ++t) lp(t, path[static_cast<size_t>(t)]) = std::log(0.7);
      ++greedy_total;
      if (greedy_decode(lp) == oracle::collapse(path, 2)) ++greedy_ok;
    });
  }
  return {beam_ok == trials && greedy_ok == greedy_total,
          "beam = MAP on " + std::to_string(beam_ok) + "/" + std::to_string(trials) +
              ", greedy = collapse on " + std::to_string(greedy_ok) + "/" +
              std::to_string(greedy_total) + " argmax paths"};
}

Outcome criterion6() {
  Rng rng(606);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const int alphabet = 2 + static_cast<int>(rng.below(5));
    const LabelSeq ref = oracle::random_labels(rng, 20, alphabet, 1);
    const LabelSeq hyp = oracle::random_labels(rng, 20, alphabet, 0);
    const double expect = static_cast<double>(oracle::levenshtein(ref, hyp)) / ref.size();
    if (label_error_rate(ref, hyp) == expect) ++agree;
  }
  return {agree == 1000, std::to_string(agree) + "/1000 pairs agree exactly"};
}

Outcome criterion7() {
  const Alphabet ru = builtin_alphabet("ru");
  const Alphabet kk = builtin_alphabet("kk");
  Rng rng(707);
  std::vector<Mat<float>> probes;
  for (int i = 0; i < 50; ++i) {
    Mat<float> m(5 + static_cast<int>(rng.below(40)), 13);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<float>(rng.normal());
    probes.push_back(std::move(m));
  }
  bool ok = true;
  std::string detail;
  for (bool bi : {false, true}) {
    ModelConfig cfg;
    cfg.hidden = 32;
    cfg.bidirectional = bi;
    cfg.feature_dim = 13;
    cfg.num_classes = ru.num_classes();
    cfg.seed = 70 + (bi ? 1 : 0);
    // Perturb away from init so the copy is non-trivial.
    ModelParams src = init_params(cfg);
    for (auto& v : src.tensors()) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v.data[i] += 0.05f * static_cast<float>(rng.normal());
    }
    const Checkpoint ck = make_checkpoint(src, cfg, ru);
    ModelConfig tgt = cfg;
    tgt.num_classes = kk.num_classes();
    const TransferResult tr = transfer_weights(ck, tgt, kk, 7);

    int identical = 0;
    for (const auto& x : probes) {
      const auto a = forward(src, cfg, x, false, 0);
      const auto b = forward(tr.params, tr.config, x, false, 0);
      bool same = true;
      for (size_t l = 0; l < a.cache.layers.size(); ++l) {
        const auto& oa = a.cache.layers[l].output;
        const auto& ob = b.cache.layers[l].output;
        same = same && oa.rows() == ob.rows() && oa.cols() == ob.cols() &&
               std::memcmp(oa.data(), ob.data(), sizeof(float) * oa.size()) == 0;
      }
      if (same) ++identical;
    }
    const VerifyReport vr = verify_transfer(src, tr.params, tr.config, probes);

    std::vector<std::string> all = tr.report.copied;
    all.insert(all.end(), tr.report.reinitialized.begin(), tr.report.reinitialized.end());
    const auto names = tensor_names(tr.config);
    std::vector<std::string> sorted_all = all;
    std::vector<std::string> sorted_names = names;
    std::sort(sorted_all.begin(), sorted_all.end());
    std::sort(sorted_names.begin(), sorted_names.end());
    const bool partition = sorted_all == sorted_names &&
                           std::adjacent_find(sorted_all.begin(), sorted_all.end()) == sorted_all.end();
    const bool this_ok = identical == 50 && vr.identical() && partition;
    ok = ok && this_ok;
    detail += std::string(bi ? "BiLSTM" : "LSTM") + ": " + std::to_string(identical) +
              "/50 probes bit-identical, " + std::to_string(tr.report.copied.size()) + " copied + " +
              std::to_string(tr.report.reinitialized.size()) + " reinitialized" +
              (partition ? " (partition)" : " (NOT a partition)") + (bi ? "" : "; ");
  }
  return {ok, detail};
}

Outcome criterion8() {
  const fs::path dir = fs::temp_directory_path() / ("ctcx_accept_ckpt_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  Rng rng(808);
  int exact = 0;
  int bilstm = 0;
  for (int i = 0; i < 20; ++i) {
    const Alphabet a = builtin_alphabet(rng.below(2) == 0 ? "ru" : "kk");
    ModelConfig cfg;
    cfg.hidden = 1 + static_cast<int>(rng.below(24));
    cfg.bidirectional = i % 2 == 1;
    cfg.feature_dim = 1 + static_cast<int>(rng.below(20));
    cfg.num_classes = a.num_classes();
    cfg.seed = rng.next();
    if (cfg.bidirectional) ++bilstm;
    ModelParams p = init_params(cfg);
    for (auto& v : p.tensors()) {
      for (Eigen::Index k = 0; k < v.size(); ++k) v.data[k] = static_cast<float>(rng.normal());
    }
    const std::string path = (dir / ("m" + std::to_string(i) + ".ctcx")).string();
    save_checkpoint(p, cfg, a, path);
    const LoadedModel m = load_checkpoint(path, cfg);
    const auto va = p.tensors();
    const auto vb = m.params.tensors();
    bool same = va.size() == vb.size() && m.alphabet && *m.alphabet == a;
    for (size_t k = 0; same && k < va.size(); ++k) {
      same = va[k].name == vb[k].name && va[k].size() == vb[k].size() &&
             std::memcmp(va[k].data, vb[k].data, sizeof(float) * va[k].size()) == 0;
    }
    if (same) ++exact;
  }
  fs::remove_all(dir);
  return {exact == 20, std::to_string(exact) + "/20 models bit-identical (" + std::to_string(bilstm) +
                           " BiLSTM)"};
}

std::vector<Utterance> synthetic_utterances(const Alphabet& a, size_t n, uint64_t seed) {
  SyntheticSpec spec;
  spec.count = n;
  spec.seed = seed;
  std::vector<Utterance> out;
  for (const auto& s : generate_synthetic(a, spec)) {
    Utterance u;
    u.text = s.text;
    u.labels = encode(s.text, a);
    FeatureMatrix fm;
    fm.values = s.features;
    u.features = feature_normalize(fm).values.cast<float>();
    out.push_back(std::move(u));
  }
  return out;
}

// Desk-scale training settings for criteria 9 and 10.
TrainConfig desk_config(int epochs, uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.dropout_keep = 1.0;
  cfg.epochs = epochs;
  cfg.seed = seed;
  return cfg;
}

Outcome criterion9() {
  const auto t0 = Clock::now();
  const Alphabet kk = builtin_alphabet("kk");
  const auto data = synthetic_utterances(kk, 10, 9);
  double mean_frames = 0.0;
  for (const auto& u : data) mean_frames += static_cast<double>(u.features.rows()) / data.size();
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.bidirectional = true;
  cfg.dropout_keep = 1.0;
  cfg.feature_dim = 13;
  cfg.num_classes = kk.num_classes();
  cfg.seed = 9;
  // The training set doubles as the evaluation set, so val_ler is the
  // eval-mode LER on the training utterances.
  const TrainingRun run = train_model(init_params(cfg), cfg, data, data, desk_config(300, 9), 1);
  int reached = -1;
  for (const auto& row : run.history) {
    if (row.val_ler < 0.05) {
      reached = row.epoch;
      break;
    }
  }
  const double elapsed = seconds_since(t0);
  return {reached > 0 && elapsed < 300.0,
          "mean T " + num(mean_frames, 1) + ", train LER < 0.05 first at epoch " +
              std::to_string(reached) + ", final LER " + num(run.history.back().val_ler) + ", " +
              num(elapsed, 1) + " s"};
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

Outcome criterion10() {
  const auto t0 = Clock::now();
  const Alphabet src("source10", U"абвгдеклм ");
  const Alphabet tgt("target14", U"абвгдеклмәғқң ");
  bool ok = true;
  std::string detail;
  for (bool bi : {false, true}) {
    std::vector<double> cost_rand, cost_xfer, ler_rand, ler_xfer;
    for (uint64_t seed : {1, 2, 3}) {
      const auto sdata = synthetic_utterances(src, 40, seed * 1000 + 1);
      const auto tdata = synthetic_utterances(tgt, 12, seed * 1000 + 2);
      ModelConfig cfg;
      cfg.hidden = 16;
      cfg.bidirectional = bi;
      cfg.dropout_keep = 1.0;
      cfg.feature_dim = 13;
      cfg.num_classes = src.num_classes();
      cfg.seed = seed;
      const TrainingRun source = train_model(init_params(cfg), cfg, sdata, {}, desk_config(150, seed), 1);
      const Checkpoint ck = make_checkpoint(source.params, cfg, src);
      ModelConfig tcfg = cfg;
      tcfg.num_classes = tgt.num_classes();
      TransferResult tr = transfer_weights(ck, tcfg, tgt, seed);
      const TrainConfig tc = desk_config(200, seed);
      const TrainingRun rand = train_model(init_params(tcfg), tcfg, tdata, tdata, tc, 1);
      const TrainingRun xfer = train_model(std::move(tr.params), tcfg, tdata, tdata, tc, 1);
      cost_rand.push_back(rand.history[99].train_cost);
      cost_xfer.push_back(xfer.history[99].train_cost);
      ler_rand.push_back(rand.history[199].val_ler);
      ler_xfer.push_back(xfer.history[199].val_ler);
    }
    const double cr = median3(cost_rand), cx = median3(cost_xfer);
    const double lr = median3(ler_rand), lx = median3(ler_xfer);
    ok = ok && cx < cr && lx <= lr;
    detail += std::string(bi ? "BiLSTM" : "LSTM") + " cost@100 " + num(cx) + " vs " + num(cr) +
              ", LER@200 " + num(lx) + " vs " + num(lr) + "; ";
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 900.0;
  return {ok, detail + "(transfer vs random, medians of 3 seeds) " + num(elapsed, 1) + " s"};
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(CTCX_CLI_PATH) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion11() {
  const fs::path dir = fs::temp_directory_path() / ("ctcx_accept_det_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&dir](const std::string& n) { return (dir / n).string(); };
  const std::string common = " --hidden 8 --epochs 4 --seed 11";
  bool setup = run_cli("prepare --synthetic 24 --alphabet kk --out " + p("kk.jsonl")) == 0 &&
               run_cli("prepare --synthetic 24 --alphabet ru --synthetic-seed 5 --out " + p("ru.jsonl")) == 0 &&
               run_cli("train --manifest " + p("ru.jsonl") + " --alphabet ru --arch lstm" + common +
                       " --out " + p("ru_lstm")) == 0 &&
               run_cli("train --manifest " + p("ru.jsonl") + " --alphabet ru --arch bilstm" + common +
                       " --out " + p("ru_bilstm")) == 0;
  if (!setup) return {false, "could not prepare corpora or source models"};
  const std::string exp = "experiment --manifest " + p("kk.jsonl") + " --source-checkpoint " +
                          p("ru_lstm/model.ctcx") + " --source-checkpoint " +
                          p("ru_bilstm/model.ctcx") + common + " --out ";
  if (run_cli(exp + p("run1"), "CTCX_THREADS=1") != 0 || run_cli(exp + p("run2"), "CTCX_THREADS=3") != 0) {
    return {false, "experiment command failed"};
  }
  int identical = 0;
  int total = 0;
  for (const char* name : {"metrics_lstm_random.csv", "metrics_lstm_transfer.csv",
                           "metrics_bilstm_random.csv", "metrics_bilstm_transfer.csv"}) {
    ++total;
    const std::string a = slurp(dir / "run1" / name);
    if (!a.empty() && a == slurp(dir / "run2" / name)) ++identical;
  }
  fs::remove_all(dir);
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " metrics CSVs byte-identical (1 vs 3 worker threads)"};
}

Outcome criterion12() {
  const FeatureConfig cfg;
  Rng rng(1212);
  int frames_ok = 0;
  for (int i = 0; i < 50; ++i) {
    const auto n = static_cast<int64_t>(cfg.window_samples() + rng.below(80000));
    AudioClip c;
    c.sample_rate_hz = cfg.sample_rate_hz;
    c.samples.resize(static_cast<size_t>(n));
    for (auto& s : c.samples) s = 0.1 * rng.normal();
    const int expect = 1 + static_cast<int>((n - cfg.window_samples()) / cfg.hop_samples());
    if (mfcc(c, cfg).frames() == expect && frame_count(n, cfg) == expect) ++frames_ok;
  }

  AudioClip tone;
  tone.sample_rate_hz = cfg.sample_rate_hz;
  for (int i = 0; i < cfg.sample_rate_hz; ++i) {
    tone.samples.push_back(0.5 * std::sin(2 * M_PI * 1000.0 * i / cfg.sample_rate_hz));
  }
  const MatrixD energies = log_mel_energies(tone, cfg);
  const auto centers = mel_centers_hz(cfg);
  int nearest = 0;
  for (int m = 1; m < cfg.n_mels; ++m) {
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = m;
  }
  int peak_ok = 0;
  for (Eigen::Index t = 0; t < energies.rows(); ++t) {
    Eigen::Index best = 0;
    energies.row(t).maxCoeff(&best);
    if (best == nearest) ++peak_ok;
  }

  double dct_err = 0.0;
  for (int n : {cfg.n_mels, cfg.n_mfcc}) {
    const MatrixD d = dct_matrix(n);
    dct_err = std::max(dct_err, (d * d.transpose() - MatrixD::Identity(n, n)).cwiseAbs().maxCoeff());
  }
  const bool ok = frames_ok == 50 && peak_ok == energies.rows() && dct_err <= 1e-10;
  return {ok, "frame formula " + std::to_string(frames_ok) + "/50, 1 kHz peak in filter " +
                  std::to_string(nearest) + " (" + num(centers[nearest], 1) + " Hz) on " +
                  std::to_string(peak_ok) + "/" + std::to_string(energies.rows()) +
                  " frames, DCT max |DD^T - I| " + num(dct_err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"CTC oracle equivalence", criterion1},
      {"CTC gradient vs finite differences", criterion2},
      {"forward-backward conservation", criterion3},
      {"network gradients (BPTT)", criterion4},
      {"decoder exactness", criterion5},
      {"LER oracle", criterion6},
      {"transfer exactness", criterion7},
      {"checkpoint round trip", criterion8},
      {"desk-scale overfit", criterion9},
      {"transfer benefit", criterion10},
      {"determinism", criterion11},
      {"MFCC sanity", criterion12},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed;
}
