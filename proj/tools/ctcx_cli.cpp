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

// ctcx: command-line front end over the ctcx C API.

#include <algorithm>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctcx.h"

namespace {

using json = nlohmann::json;

struct Common {
  bool json_output = false;
  bool quiet = false;
  std::string feature_config;
};

void log_to_stderr(const char* line, void* user_data) {
  const auto* common = static_cast<const Common*>(user_data);
  if (!common->quiet) std::cerr << line << '\n';
}

// Holds the report string and frees it on scope exit.
struct Report {
  char* raw = nullptr;
  ~Report() { ctcx_string_free(raw); }
  json parsed() const { return raw == nullptr ? json() : json::parse(raw); }
};

int finish(ctcx_status status, const Report& report, const Common& common,
           const std::function<void(const json&)>& human) {
  if (status != CTCX_OK) {
    std::cerr << "error: " << ctcx_last_error() << '\n';
  }
  if (report.raw != nullptr) {
    const json parsed = report.parsed();
    if (common.json_output) {
      std::cout << parsed.dump(2) << '\n';
    } else if (status == CTCX_OK || !parsed.is_null()) {
      human(parsed);
    }
  }
  return static_cast<int>(status);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

ctcx_decoder parse_decoder(const std::string& name) {
  return name == "beam" ? CTCX_DECODER_BEAM : CTCX_DECODER_GREEDY;
}

void add_feature_flag(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.feature_config, "JSON file with feature settings");
}

void add_train_flags(CLI::App* cmd, ctcx_train_config& tc, std::vector<double>& split,
                     std::string& eval_decoder) {
  cmd->add_option("--learning-rate", tc.learning_rate, "SGD learning rate")->capture_default_str();
  cmd->add_option("--momentum", tc.momentum, "Momentum coefficient")->capture_default_str();
  cmd->add_option("--batch-size", tc.batch_size, "Utterances per step")->capture_default_str();
  cmd->add_option("--epochs", tc.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--dropout-keep", tc.dropout_keep, "Dropout keep probability")
      ->capture_default_str();
  cmd->add_option("--split", split, "Train/validation/test fractions")
      ->expected(3)
      ->capture_default_str();
  cmd->add_option("--grad-clip-norm", tc.grad_clip_norm, "Global-norm clip, <= 0 disables")
      ->capture_default_str();
  cmd->add_option("--seed", tc.seed, "Random seed")->capture_default_str();
  cmd->add_option("--eval-decoder", eval_decoder, "Validation decoder")
      ->check(CLI::IsMember({"greedy", "beam"}))
      ->capture_default_str();
  cmd->add_option("--eval-beam-width", tc.beam_width, "Beam width for validation decoding")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctcx: CTC speech recognition with cross-language transfer"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_flag("--json", common.json_output, "Print the machine-readable report only");
  app.add_flag("-q,--quiet", common.quiet, "Suppress progress messages");

  // prepare
  ctcx_prepare_options prep;
  ctcx_prepare_options_init(&prep);
  std::string prep_manifest, prep_alphabet = "kk", prep_out;
  auto* prepare = app.add_subcommand("prepare", "Normalize and filter a manifest");
  prepare->add_option("--manifest", prep_manifest, "Input manifest (JSON lines)");
  prepare->add_option("--alphabet", prep_alphabet, "Alphabet name or file")->capture_default_str();
  prepare->add_option("--out", prep_out, "Cleaned manifest to write")->required();
  prepare->add_option("--synthetic", prep.synthetic_count, "Generate N synthetic utterances");
  prepare->add_option("--synthetic-seed", prep.synthetic_seed, "Synthetic corpus seed")
      ->capture_default_str();
  prepare->add_option("--prototype-seed", prep.prototype_seed, "Per-symbol prototype seed")
      ->capture_default_str();
  add_feature_flag(prepare, common);

  // features
  ctcx_features_options feat;
  ctcx_features_options_init(&feat);
  std::string feat_manifest, feat_out;
  auto* features = app.add_subcommand("features", "Compute MFCC caches");
  features->add_option("--manifest", feat_manifest, "Cleaned manifest")->required();
  features->add_option("--out-dir", feat_out, "Cache directory")->required();
  add_feature_flag(features, common);

  // train
  ctcx_train_options tr;
  ctcx_train_options_init(&tr);
  std::string tr_manifest, tr_alphabet = "kk", tr_arch = "lstm", tr_init = "random", tr_source,
                           tr_out, tr_eval_decoder = "greedy";
  bool tr_strict = false;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--manifest", tr_manifest, "Training manifest")->required();
  train->add_option("--alphabet", tr_alphabet, "Alphabet name or file")->capture_default_str();
  train->add_option("--arch", tr_arch, "Architecture")
      ->check(CLI::IsMember({"lstm", "bilstm"}))
      ->capture_default_str();
  train->add_option("--init", tr_init, "Weight initialization")
      ->check(CLI::IsMember({"random", "transfer"}))
      ->capture_default_str();
  train->add_option("--source-checkpoint", tr_source, "Source model for transfer init");
  train->add_option("--out", tr_out, "Output directory")->required();
  train->add_option("--hidden", tr.hidden, "Hidden units per direction")->capture_default_str();
  train->add_flag("--strict-paper", tr_strict, "Disable gradient clipping");
  std::vector<double> tr_split(tr.train.split, tr.train.split + 3);
  add_train_flags(train, tr.train, tr_split, tr_eval_decoder);
  add_feature_flag(train, common);

  // transfer
  ctcx_transfer_options xf;
  ctcx_transfer_options_init(&xf);
  std::string xf_source, xf_alphabet, xf_out, xf_report;
  auto* transfer = app.add_subcommand("transfer", "Initialize a target model from a source");
  transfer->add_option("--source", xf_source, "Source checkpoint")->required();
  transfer->add_option("--target-alphabet", xf_alphabet, "Target alphabet")->required();
  transfer->add_option("--out", xf_out, "Target checkpoint to write")->required();
  transfer->add_option("--report", xf_report, "Report path (default <out>.report.json)");
  transfer->add_option("--seed", xf.seed, "Seed for the new output layer")->capture_default_str();
  transfer->add_option("--probes", xf.probes, "Verification probe inputs")->capture_default_str();

  // evaluate
  ctcx_evaluate_options ev;
  ctcx_evaluate_options_init(&ev);
  std::string ev_checkpoint, ev_manifest, ev_alphabet, ev_decoder = "greedy";
  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a manifest");
  evaluate->add_option("--checkpoint", ev_checkpoint, "Model checkpoint")->required();
  evaluate->add_option("--manifest", ev_manifest, "Evaluation manifest")->required();
  evaluate->add_option("--alphabet", ev_alphabet, "Override the checkpoint alphabet");
  evaluate->add_option("--decoder", ev_decoder, "Decoder")
      ->check(CLI::IsMember({"greedy", "beam"}))
      ->capture_default_str();
  evaluate->add_option("--beam-width", ev.beam_width, "Beam width")->capture_default_str();
  add_feature_flag(evaluate, common);

  // decode
  ctcx_decode_options dc;
  ctcx_decode_options_init(&dc);
  std::string dc_checkpoint, dc_wav, dc_alphabet, dc_decoder = "greedy";
  auto* decode = app.add_subcommand("decode", "Transcribe one WAV file");
  decode->add_option("--checkpoint", dc_checkpoint, "Model checkpoint")->required();
  decode->add_option("--wav", dc_wav, "16-bit PCM mono WAV")->required();
  decode->add_option("--alphabet", dc_alphabet, "Override the checkpoint alphabet");
  decode->add_option("--decoder", dc_decoder, "Decoder")
      ->check(CLI::IsMember({"greedy", "beam"}))
      ->capture_default_str();
  decode->add_option("--beam-width", dc.beam_width, "Beam width")->capture_default_str();
  add_feature_flag(decode, common);

  // experiment
  ctcx_experiment_options ex;
  ctcx_experiment_options_init(&ex);
  std::string ex_manifest, ex_alphabet = "kk", ex_out, ex_eval_decoder = "greedy";
  std::vector<std::string> ex_sources;
  bool ex_strict = false;
  auto* experiment = app.add_subcommand("experiment", "Run the four-scenario comparison");
  experiment->add_option("--manifest", ex_manifest, "Target-language manifest")->required();
  experiment->add_option("--alphabet", ex_alphabet, "Target alphabet")->capture_default_str();
  experiment->add_option("--source-checkpoint", ex_sources,
                         "Source model(s); matched to LSTM/BiLSTM by direction count");
  experiment->add_option("--out", ex_out, "Output directory")->required();
  experiment->add_option("--hidden", ex.hidden, "Hidden units per direction")
      ->capture_default_str();
  experiment->add_flag("--strict-paper", ex_strict, "Disable gradient clipping");
  std::vector<double> ex_split(ex.train.split, ex.train.split + 3);
  add_train_flags(experiment, ex.train, ex_split, ex_eval_decoder);
  add_feature_flag(experiment, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ctcx_set_log_callback(log_to_stderr, &common);

  ctcx_feature_config fcfg;
  ctcx_feature_config_init(&fcfg);
  if (!common.feature_config.empty() &&
      ctcx_feature_config_load(common.feature_config.c_str(), &fcfg) != CTCX_OK) {
    std::cerr << "error: " << ctcx_last_error() << '\n';
    return CTCX_ERROR_USAGE;
  }
  auto cstr = [](const std::string& s) { return s.empty() ? nullptr : s.c_str(); };
  Report report;

  if (*prepare) {
    prep.manifest = cstr(prep_manifest);
    prep.alphabet = prep_alphabet.c_str();
    prep.out = prep_out.c_str();
    prep.features = fcfg;
    const ctcx_status st = ctcx_prepare(&prep, &report.raw);
    return finish(st, report, common, [](const json& r) {
      std::cout << "kept " << r.value("kept", 0) << " of " << r.value("total", 0) << " rows\n";
      for (const auto& [reason, count] : r.at("dropped").items()) {
        std::cout << "dropped " << count.get<int>() << " (" << reason << ")\n";
      }
    });
  }
  if (*features) {
    feat.manifest = feat_manifest.c_str();
    feat.out_dir = feat_out.c_str();
    feat.features = fcfg;
    const ctcx_status st = ctcx_features(&feat, &report.raw);
    return finish(st, report, common, [](const json& r) {
      std::cout << "wrote " << r.at("written").get<int>() << ", skipped "
                << r.at("skipped").get<int>() << " cached, failed " << r.at("failed").size()
                << '\n';
      for (const json& f : r.at("failed")) {
        std::cout << "  " << f.at("audio").get<std::string>() << ": "
                  << f.at("error").get<std::string>() << '\n';
      }
      std::cout << "manifest: " << r.at("manifest").get<std::string>() << '\n';
    });
  }
  if (*train) {
    tr.manifest = tr_manifest.c_str();
    tr.alphabet = tr_alphabet.c_str();
    tr.bidirectional = tr_arch == "bilstm";
    tr.transfer_init = tr_init == "transfer";
    tr.source_checkpoint = cstr(tr_source);
    tr.out_dir = tr_out.c_str();
    tr.strict_paper = tr_strict;
    std::copy(tr_split.begin(), tr_split.end(), tr.train.split);
    tr.train.eval_decoder = parse_decoder(tr_eval_decoder);
    tr.features = fcfg;
    const ctcx_status st = ctcx_train(&tr, &report.raw);
    return finish(st, report, common, [](const json& r) {
      if (r.contains("final")) {
        const json& f = r.at("final");
        std::cout << "epoch " << f.at("epoch").get<int>() << ": train cost "
                  << fmt(f.at("train_cost")) << ", train LER " << fmt(f.at("train_ler"))
                  << ", validation cost " << fmt(f.at("val_cost")) << ", validation LER "
                  << fmt(f.at("val_ler")) << '\n';
      }
      std::cout << "metrics: " << r.at("metrics_csv").get<std::string>() << '\n'
                << "checkpoint: " << r.at("checkpoint").get<std::string>() << '\n';
    });
  }
  if (*transfer) {
    xf.source = xf_source.c_str();
    xf.target_alphabet = xf_alphabet.c_str();
    xf.out = xf_out.c_str();
    xf.report_path = cstr(xf_report);
    const ctcx_status st = ctcx_transfer(&xf, &report.raw);
    return finish(st, report, common, [](const json& r) {
      std::cout << r.at("source_alphabet").get<std::string>() << " -> "
                << r.at("target_alphabet").get<std::string>() << ": copied "
                << r.at("copied").size() << ", reinitialized " << r.at("reinitialized").size()
                << '\n';
      for (const auto& [name, reason] : r.at("skipped_reason").items()) {
        std::cout << "  " << name << ": " << reason.get<std::string>() << '\n';
      }
      std::cout << "verify max deviation: " << r.at("verify").at("max_abs_deviation").get<double>()
                << '\n'
                << "report: " << r.at("report").get<std::string>() << '\n';
    });
  }
  if (*evaluate) {
    ev.checkpoint = ev_checkpoint.c_str();
    ev.manifest = ev_manifest.c_str();
    ev.alphabet = cstr(ev_alphabet);
    ev.decoder = parse_decoder(ev_decoder);
    ev.features = fcfg;
    const ctcx_status st = ctcx_evaluate(&ev, &report.raw);
    return finish(st, report, common, [](const json& r) {
      std::cout << "utterances " << r.at("utterances").get<int>() << ", avg cost "
                << fmt(r.at("avg_cost")) << ", LER " << fmt(r.at("ler")) << '\n';
    });
  }
  if (*decode) {
    dc.checkpoint = dc_checkpoint.c_str();
    dc.wav = dc_wav.c_str();
    dc.alphabet = cstr(dc_alphabet);
    dc.decoder = parse_decoder(dc_decoder);
    dc.features = fcfg;
    const ctcx_status st = ctcx_decode(&dc, &report.raw);
    return finish(st, report, common, [](const json& r) {
      std::cout << r.at("transcript").get<std::string>() << '\n';
    });
  }
  if (*experiment) {
    std::vector<const char*> sources;
    for (const std::string& s : ex_sources) sources.push_back(s.c_str());
    ex.manifest = ex_manifest.c_str();
    ex.alphabet = ex_alphabet.c_str();
    ex.source_checkpoints = sources.data();
    ex.num_source_checkpoints = sources.size();
    ex.out_dir = ex_out.c_str();
    ex.strict_paper = ex_strict;
    std::copy(ex_split.begin(), ex_split.end(), ex.train.split);
    ex.train.eval_decoder = parse_decoder(ex_eval_decoder);
    ex.features = fcfg;
    const ctcx_status st = ctcx_experiment(&ex, &report.raw);
    return finish(st, report, common, [&report](const json&) {
      char* table = nullptr;
      if (ctcx_format_experiment_table(report.raw, &table) == CTCX_OK) std::cout << table;
      ctcx_string_free(table);
    });
  }
  return 0;
}
