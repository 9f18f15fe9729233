// tinyasr/runner.hpp

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

#ifndef TINYASR_RUNNER_HPP_
#define TINYASR_RUNNER_HPP_

// Decoding and scoring drivers.  Decoding checks that the supplied alphabet
// is byte-for-byte the one the checkpoint was trained against before any
// utterance is touched.  Scoring compares one or more hypothesis files
// against a reference manifest and renders a bucketed error-rate table;
// systems with different target schemes can share the table because each row
// carries its own metric.

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tinyasr/attention.hpp"
#include "tinyasr/checkpoint.hpp"
#include "tinyasr/ctc_model.hpp"
#include "tinyasr/features.hpp"
#include "tinyasr/manifest.hpp"
#include "tinyasr/metrics.hpp"
#include "tinyasr/targets.hpp"
#include "tinyasr/wav.hpp"

namespace tinyasr {

struct DecodeOptions {
  std::string checkpoint;
  std::string alphabet;
  std::string manifest;
  std::string output;          // hypothesis JSONL
  std::size_t beam_width = 16;     // attention models only
  std::size_t max_decode_len = 0;  // 0 derives a cap from encoder length
};

struct DecodeSummary {
  std::size_t utterances = 0;
  std::size_t truncated = 0;  // beams that never produced a full hypothesis
};

namespace detail {

inline Matrix load_entry_features(const ManifestEntry& entry) {
  if (entry.has_features())
    return read_feature_cache(entry.feature_path, entry.utterance_id).frames;
  AudioBuffer audio = read_wav(entry.audio_path);
  return extract_features(audio, FeatureConfig{}, entry.utterance_id).frames;
}

inline void check_alphabet_matches(const Alphabet& alphabet,
                                   const Checkpoint& ckpt) {
  if (alphabet.content_hash() != ckpt.alphabet_hash)
    throw DataError(
        "alphabet does not match the checkpoint; the model was trained "
        "against a different symbol table");
}

}  // namespace detail

// Decodes every utterance of the manifest with the checkpointed model and
// writes one JSON object per line: utterance_id, tokens, text, log_score.
inline DecodeSummary run_decode(const DecodeOptions& opt,
                                std::ostream* progress = nullptr) {
  if (opt.beam_width < 1) throw UsageError("beam width must be >= 1");
  Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  Alphabet alphabet = load_alphabet(opt.alphabet, ckpt.scheme);
  detail::check_alphabet_matches(alphabet, ckpt);
  Manifest manifest = load_manifest(opt.manifest);

  ParamStore store;
  std::optional<CtcModel> ctc;
  std::optional<LasModel> las;
  if (ckpt.model == ModelKind::kCtc) {
    ctc.emplace(ckpt.encoder, ckpt.feature_dim, ckpt.num_targets);
    ctc->register_params(store);
  } else {
    LasConfig lcfg;
    lcfg.num_targets = ckpt.num_targets;
    lcfg.listener_layers = ckpt.encoder.layers;
    lcfg.listener_units = ckpt.encoder.units;
    lcfg.pyramid_step = ckpt.encoder.pyramid_step;
    lcfg.speller_layers = ckpt.speller_layers;
    lcfg.speller_units = ckpt.speller_units;
    lcfg.embed_dim = ckpt.embed_dim;
    lcfg.attn_dim = ckpt.attn_dim;
    lcfg.beam_width = opt.beam_width;
    lcfg.max_decode_len = opt.max_decode_len;
    lcfg.dropout_rate = 0.0;
    las.emplace(lcfg, ckpt.feature_dim);
    las->register_params(store);
  }
  load_params_into(store, ckpt.params);

  std::ofstream out(opt.output);
  if (!out) throw DataError("cannot write hypotheses: " + opt.output);

  DecodeSummary summary;
  for (const ManifestEntry& entry : manifest.entries) {
    Matrix features = detail::load_entry_features(entry);
    if (features.cols() != ckpt.feature_dim)
      throw DataError("feature dim mismatch at " + entry.utterance_id +
                      ": checkpoint expects " +
                      std::to_string(ckpt.feature_dim) + ", file has " +
                      std::to_string(features.cols()));

    std::vector<int> ids;
    double log_score = 0.0;
    bool truncated = false;
    if (ctc) {
      CtcHypothesis hyp = ctc->greedy_decode(store, features);
      ids = std::move(hyp.ids);
      log_score = hyp.score;
    } else {
      auto hyps = las->beam_search(store, features, opt.beam_width);
      ids = hyps.front().ids;
      log_score = hyps.front().log_score;
      truncated = hyps.front().truncated;
      if (truncated) ++summary.truncated;
    }

    nlohmann::ordered_json obj;
    obj["utterance_id"] = entry.utterance_id;
    nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
    std::string text;
    for (int id : ids) {
      tokens.push_back(alphabet.symbol(id));
      if (id == alphabet.separator_id())
        text += ' ';
      else
        text += alphabet.symbol(id);
    }
    obj["tokens"] = std::move(tokens);
    obj["text"] = std::move(text);
    obj["log_score"] = log_score;
    if (truncated) obj["truncated"] = true;
    out << obj.dump() << "\n";
    ++summary.utterances;
    if (progress)
      *progress << entry.utterance_id << "  " << obj["text"].get<std::string>()
                << "\n";
  }
  if (!out) throw DataError("failed writing hypotheses: " + opt.output);
  return summary;
}

struct SystemSpec {
  std::string label;  // row label in the report
  Scheme scheme = Scheme::kUnified;
  std::string alphabet;    // path
  std::string lexicon;     // path; required for the reduced scheme
  std::string hypotheses;  // JSONL written by run_decode
};

struct EvaluateOptions {
  std::string manifest;
  std::vector<SystemSpec> systems;
  BucketSpec buckets = BucketSpec::standard();
};

namespace detail {

// utterance_id -> hypothesis tokens, as written by run_decode.
inline std::map<std::string, std::vector<std::string>> load_hypotheses(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open hypothesis file: " + path);
  std::map<std::string, std::vector<std::string>> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": not valid JSON (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("utterance_id") ||
        !obj["utterance_id"].is_string() || !obj.contains("tokens") ||
        !obj["tokens"].is_array())
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": expected utterance_id and tokens");
    std::string id = obj["utterance_id"].get<std::string>();
    std::vector<std::string> tokens;
    for (const auto& t : obj["tokens"]) {
      if (!t.is_string())
        throw DataError(path + " line " + std::to_string(line_no) +
                        ": tokens must be strings");
      tokens.push_back(t.get<std::string>());
    }
    if (!out.emplace(std::move(id), std::move(tokens)).second)
      throw DataError(path + " line " + std::to_string(line_no) +
                      ": duplicate utterance id");
  }
  return out;
}

}  // namespace detail

// Scores every system against the manifest transcripts.  Hypotheses naming
// unknown utterances are an error; manifest utterances missing from a
// hypothesis file count as fully deleted.
inline Report run_evaluate(const EvaluateOptions& opt) {
  if (opt.systems.empty()) throw UsageError("no systems to evaluate");
  opt.buckets.validate();
  Manifest manifest = load_manifest(opt.manifest);
  if (manifest.entries.empty())
    throw DataError("manifest has no utterances: " + opt.manifest);

  std::set<std::string> known;
  for (const ManifestEntry& entry : manifest.entries)
    known.insert(entry.utterance_id);

  std::vector<ModelRow> rows;
  std::vector<std::string> bucket_names;
  for (const SystemSpec& sys : opt.systems) {
    Alphabet alphabet = load_alphabet(sys.alphabet, sys.scheme);
    std::optional<Lexicon> lexicon;
    if (sys.scheme == Scheme::kReduced) {
      if (sys.lexicon.empty())
        throw UsageError("system " + sys.label +
                         " uses the reduced scheme and needs a lexicon");
      lexicon = load_lexicon(sys.lexicon, alphabet);
    }

    auto hyps = detail::load_hypotheses(sys.hypotheses);
    std::string extras;
    for (const auto& [id, tokens] : hyps)
      if (!known.count(id)) extras += (extras.empty() ? "" : ", ") + id;
    if (!extras.empty())
      throw DataError("hypothesis file " + sys.hypotheses +
                      " names utterances not in the manifest: " + extras);

    std::vector<EvalPair> pairs;
    for (const ManifestEntry& entry : manifest.entries) {
      EvalPair pair;
      pair.utterance_id = entry.utterance_id;
      pair.word_count = static_cast<int>(entry.word_count);
      pair.scheme = sys.scheme;
      pair.reference =
          sys.scheme == Scheme::kReduced
              ? tokenize_reduced(entry.transcript, *lexicon, alphabet).ids
              : tokenize_unified(entry.transcript, alphabet).ids;
      auto it = hyps.find(entry.utterance_id);
      if (it != hyps.end()) {
        for (const std::string& token : it->second) {
          auto id = alphabet.find(token);
          if (!id)
            throw DataError("hypothesis token \"" + token + "\" for " +
                            entry.utterance_id +
                            " is not in the alphabet of system " + sys.label);
          pair.hypothesis.push_back(*id);
        }
      }
      pairs.push_back(std::move(pair));
    }

    BucketedPairs bucketed = bucket_by_length(pairs, opt.buckets);
    if (bucket_names.empty()) bucket_names = bucketed.names;

    ModelRow row;
    row.model = sys.label;
    row.metric = sys.scheme == Scheme::kReduced ? "PER" : "CER";
    for (const std::string& name : bucketed.names)
      row.by_bucket[name] = tally_pairs(bucketed.pairs[name]);
    rows.push_back(std::move(row));
  }
  return make_report(rows, bucket_names);
}

}  // namespace tinyasr

#endif  // TINYASR_RUNNER_HPP_
