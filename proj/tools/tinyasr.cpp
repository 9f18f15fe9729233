// tools/tinyasr.cpp

// Copyright 2026  tinyasr contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Experiment driver.  Subcommands:
//   synth     generate a seeded synthetic corpus
//   train     train a model from a config and manifests
//   decode    decode a manifest with a checkpoint
//   evaluate  score hypothesis files against reference transcripts
//   gradcheck finite-difference sanity check of the analytic gradients
//   stats     target-set size comparison for two alphabets
//
// Exit codes: 0 ok, 1 usage/config, 2 data validation, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tinyasr/attention.hpp"
#include "tinyasr/common.hpp"
#include "tinyasr/config.hpp"
#include "tinyasr/ctc_model.hpp"
#include "tinyasr/grad_check.hpp"
#include "tinyasr/runner.hpp"
#include "tinyasr/synth.hpp"
#include "tinyasr/trainer.hpp"

namespace {

using namespace tinyasr;

int cmd_synth(const SynthSpec& spec, const std::string& out_dir) {
  SynthSummary s = generate_synthetic_corpus(spec, out_dir);
  std::cout << "wrote " << (s.train_count + s.dev_count + s.test_count)
            << " utterances (" << s.train_count << " train / " << s.dev_count
            << " dev / " << s.test_count << " test), " << s.total_frames
            << " frames total\n"
            << "alphabets: " << s.char_count << " chars, " << s.phone_count
            << " phones\n"
            << "corpus dir: " << out_dir << "\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, const TrainPaths& paths,
              bool quiet) {
  ExperimentConfig cfg = parse_config(config_path);
  TrainResult r = train_model(cfg, paths, quiet ? nullptr : &std::cout);
  std::cout << "trained " << r.epochs << " epochs; best dev loss "
            << detail::format_loss(r.best_dev_loss) << " at epoch "
            << r.best_epoch;
  if (r.skipped_total > 0)
    std::cout << "; skipped " << r.skipped_total << " infeasible utterances";
  std::cout << "\n";
  if (!paths.checkpoint.empty())
    std::cout << "checkpoint: " << paths.checkpoint << "\n";
  return kExitOk;
}

int cmd_decode(const DecodeOptions& opt, bool quiet) {
  DecodeSummary s = run_decode(opt, quiet ? nullptr : &std::cout);
  std::cout << "decoded " << s.utterances << " utterances";
  if (s.truncated > 0) std::cout << " (" << s.truncated << " truncated)";
  std::cout << "\nhypotheses: " << opt.output << "\n";
  return kExitOk;
}

BucketSpec parse_buckets(const std::string& text) {
  BucketSpec spec;
  std::istringstream ss(text);
  std::string range;
  int index = 0;
  while (std::getline(ss, range, ',')) {
    auto colon = range.find(':');
    if (colon == std::string::npos)
      throw ConfigError("bucket range \"" + range + "\" is not min:max");
    BucketRange r;
    try {
      r.min_words = std::stoi(range.substr(0, colon));
      r.max_words = std::stoi(range.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bucket range \"" + range + "\" is not numeric");
    }
    r.name = "Test" + std::to_string(++index);
    spec.ranges.push_back(std::move(r));
  }
  spec.validate();
  return spec;
}

int cmd_evaluate(const EvaluateOptions& opt, const std::string& csv_path) {
  Report report = run_evaluate(opt);
  std::cout << report.text;
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw DataError("cannot write report csv: " + csv_path);
    csv << report.csv;
    std::cout << "csv: " << csv_path << "\n";
  }
  return kExitOk;
}

int cmd_stats(const std::string& unified_path, const std::string& reduced_path,
              bool strict) {
  Alphabet unified = load_alphabet(unified_path, Scheme::kUnified, strict);
  Alphabet reduced = load_alphabet(reduced_path, Scheme::kReduced, strict);
  TargetSetStats stats = target_set_stats(unified, reduced);
  std::cout << "unified targets: " << stats.unified_size << "\n"
            << "reduced targets: " << stats.reduced_size << "\n"
            << "reduction: " << stats.reduction_percent << "%\n";
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed) {
  const double tolerance = 1e-4;
  const double epsilon = 1e-5;
  // Coordinates agreeing to within this absolute slack pass outright; central
  // differences at this epsilon cannot resolve finer disagreements.
  const double abs_floor = 1e-8;
  bool ok = true;

  auto report_line = [&](const char* what, const GradCheckReport& r) {
    bool pass = r.max_rel_error <= tolerance;
    ok = ok && pass;
    std::cout << (pass ? "ok   " : "FAIL ") << what << ": max rel "
              << r.max_rel_error << " over " << r.checked << " coords";
    if (r.within_floor > 0)
      std::cout << " (" << r.within_floor << " within absolute " << abs_floor
                << ")";
    if (!pass)
      std::cout << "; worst " << r.worst_param << "[" << r.worst_index
                << "] analytic " << r.worst_analytic << " numeric "
                << r.worst_numeric;
    std::cout << "\n";
  };

  {
    EncoderConfig ecfg;
    ecfg.kind = EncoderKind::kFlat;
    ecfg.layers = 1;
    ecfg.units = 4;
    CtcModel model(ecfg, 3, 3);
    ParamStore store;
    model.register_params(store);
    store.init_uniform_scaled(seed);
    for (auto& [name, e] : store.entries())
      for (std::size_t i = 0; i < e.value.size(); ++i)
        e.value.data()[i] *= 2.0;

    Rng data_rng(Rng::mix(seed, 5));
    Matrix features(7, 3);
    for (std::size_t i = 0; i < features.size(); ++i)
      features.data()[i] = data_rng.gaussian();
    std::vector<int> target = {0, 2, 1};

    auto loss_fn = [&](ParamStore& p) {
      p.zero_grads();
      CtcLossCache cache;
      double l = model.loss(p, features, target, false, {}, nullptr, &cache);
      model.loss_backward(p, cache);
      return l;
    };
    report_line("ctc model", grad_check(loss_fn, store, epsilon, 0, seed, abs_floor));
  }

  {
    LasConfig cfg;
    cfg.num_targets = 3;
    cfg.listener_layers = 2;
    cfg.listener_units = 2;
    cfg.pyramid_step = 2;
    cfg.speller_layers = 2;
    cfg.speller_units = 3;
    cfg.embed_dim = 3;
    cfg.attn_dim = 3;
    cfg.dropout_rate = 0.0;
    LasModel model(cfg, 4);
    ParamStore store;
    model.register_params(store);
    store.init_uniform_scaled(seed);
    // Scale the weights up so every sampled gradient stays above the
    // resolution of central differences at this epsilon.
    for (auto& [name, e] : store.entries()) {
      double f = name.rfind("las.att.", 0) == 0        ? 8.0
                 : name.rfind("las.listener.", 0) == 0 ? 3.0
                                                       : 2.0;
      for (std::size_t i = 0; i < e.value.size(); ++i)
        e.value.data()[i] *= f;
    }

    Rng data_rng(Rng::mix(seed, 6));
    Matrix features(12, 4);
    for (std::size_t i = 0; i < features.size(); ++i)
      features.data()[i] = data_rng.gaussian();
    std::vector<int> target = {1, 0, 2, 1};

    auto loss_fn = [&](ParamStore& p) {
      p.zero_grads();
      LasLossCache cache;
      double l = model.loss(p, features, target, false, {}, nullptr, &cache);
      model.loss_backward(p, cache);
      return l;
    };
    report_line("attention model", grad_check(loss_fn, store, epsilon, 0, seed, abs_floor));
  }

  if (!ok) {
    std::cerr << "gradient check failed (tolerance " << tolerance << ")\n";
    return kExitNumeric;
  }
  std::cout << "all gradients within " << tolerance << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tinyasr experiment driver"};
  app.require_subcommand(1);

  // synth
  SynthSpec spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--vocab", spec.vocab_size, "vocabulary size");
  synth->add_option("--phones", spec.num_phones, "phone inventory size");
  synth->add_option("--utterances", spec.num_utterances, "utterance count");
  synth->add_option("--min-words", spec.min_words, "min words per utterance");
  synth->add_option("--max-words", spec.max_words, "max words per utterance");
  synth->add_option("--min-frames", spec.min_frames, "min frames per phone");
  synth->add_option("--max-frames", spec.max_frames, "max frames per phone");
  synth->add_option("--feature-dim", spec.feature_dim, "feature dimensions");
  synth->add_option("--gain", spec.template_gain, "phone template energy");
  synth->add_option("--noise", spec.noise_sigma, "additive noise sigma");
  synth->add_option("--seed", spec.seed, "corpus seed");

  // train
  std::string train_config;
  TrainPaths paths;
  bool train_quiet = false;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", train_config, "experiment config")->required();
  train->add_option("--train", paths.train_manifest, "training manifest")
      ->required();
  train->add_option("--dev", paths.dev_manifest, "dev manifest")->required();
  train->add_option("--checkpoint", paths.checkpoint, "checkpoint output")
      ->required();
  train->add_option("--log", paths.csv, "per-epoch CSV log");
  train->add_flag("--quiet", train_quiet, "suppress per-epoch progress");

  // decode
  DecodeOptions dec;
  auto* decode = app.add_subcommand("decode", "decode a manifest");
  decode->add_option("--checkpoint", dec.checkpoint, "model checkpoint")
      ->required();
  decode->add_option("--alphabet", dec.alphabet, "alphabet file")->required();
  decode->add_option("--manifest", dec.manifest, "utterances to decode")
      ->required();
  decode->add_option("--output", dec.output, "hypothesis JSONL")->required();
  decode->add_option("--beam-width", dec.beam_width,
                     "beam width (attention models)");
  decode->add_option("--max-decode-len", dec.max_decode_len,
                     "hypothesis length cap; 0 derives from input");
  bool decode_verbose = false;
  decode->add_flag("--verbose", decode_verbose, "print each hypothesis");

  // evaluate
  std::string eval_manifest, eval_buckets, eval_csv;
  std::vector<std::vector<std::string>> eval_systems;
  auto* evaluate = app.add_subcommand("evaluate", "score hypothesis files");
  evaluate->add_option("--manifest", eval_manifest, "reference manifest")
      ->required();
  evaluate
      ->add_option("--system", eval_systems,
                   "LABEL SCHEME ALPHABET LEXICON HYPOTHESES (LEXICON '-' "
                   "when unused); repeatable")
      ->expected(5)
      ->required();
  evaluate->add_option("--buckets", eval_buckets,
                       "word-count ranges, e.g. 3:15,16:25,26:60");
  evaluate->add_option("--csv", eval_csv, "also write the report as CSV");

  // gradcheck
  std::uint64_t grad_seed = 1;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--seed", grad_seed, "model/data seed");

  // stats
  std::string stats_unified, stats_reduced;
  bool stats_strict = false;
  auto* stats = app.add_subcommand("stats", "target-set size comparison");
  stats->add_option("--unified", stats_unified, "unified alphabet file")
      ->required();
  stats->add_option("--reduced", stats_reduced, "reduced alphabet file")
      ->required();
  stats->add_flag("--strict", stats_strict,
                  "enforce the full 95/63 inventory sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(spec, synth_out);
    if (train->parsed()) return cmd_train(train_config, paths, train_quiet);
    if (decode->parsed()) return cmd_decode(dec, !decode_verbose);
    if (evaluate->parsed()) {
      EvaluateOptions opt;
      opt.manifest = eval_manifest;
      if (!eval_buckets.empty()) opt.buckets = parse_buckets(eval_buckets);
      for (const auto& sys : eval_systems) {
        SystemSpec s;
        s.label = sys[0];
        s.scheme = scheme_from_name(sys[1]);
        s.alphabet = sys[2];
        if (sys[3] != "-") s.lexicon = sys[3];
        s.hypotheses = sys[4];
        opt.systems.push_back(std::move(s));
      }
      return cmd_evaluate(opt, eval_csv);
    }
    if (gradcheck->parsed()) return cmd_gradcheck(grad_seed);
    if (stats->parsed())
      return cmd_stats(stats_unified, stats_reduced, stats_strict);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
