// tinyasr/synth.hpp

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

#ifndef TINYASR_SYNTH_HPP_
#define TINYASR_SYNTH_HPP_

// Synthetic corpus generator.  It fabricates a tiny language with two phone
// classes (word-initial and word-internal), gives every phone a distinct
// spectral band, and emits feature files, manifests, both alphabets and a
// lexicon.  Word-internal phones spell as digraphs, so the character
// inventory is larger than the phone inventory and the two target schemes
// genuinely differ in sequence length.
//
// Each phone occupies a run of frames carrying its band template plus noise;
// the silence between words carries noise only.  With the noise turned off
// the phone sequence can be read straight back off the frames, which the
// tests use as an oracle.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tinyasr/common.hpp"
#include "tinyasr/features.hpp"
#include "tinyasr/manifest.hpp"
#include "tinyasr/rng.hpp"

namespace tinyasr {

struct SynthSpec {
  std::size_t vocab_size = 8;
  std::size_t num_phones = 10;  // first half word-initial, rest word-internal
  std::size_t num_utterances = 200;
  std::size_t min_words = 3;
  std::size_t max_words = 12;
  std::size_t min_frames = 3;  // frames per phone and per inter-word gap
  std::size_t max_frames = 8;
  std::size_t feature_dim = 26;
  double template_gain = 3.0;
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;

  std::size_t initial_phones() const { return num_phones / 2; }
  std::size_t internal_phones() const { return num_phones - num_phones / 2; }

  void validate() const {
    if (num_phones < 2 || num_phones > 26)
      throw ConfigError("num_phones must lie in [2, 26]");
    if (initial_phones() < 1 || internal_phones() < 1)
      throw ConfigError("need at least one phone of each class");
    std::size_t a = initial_phones(), b = internal_phones();
    if (a + 2 * b > 26)
      throw ConfigError("phone inventory too large for single-letter chars");
    // Pronunciations span 1..3 phones with no immediate repeats.
    std::size_t capacity = a * (1 + b + b * (b > 1 ? b - 1 : 1));
    if (vocab_size < 2 || vocab_size > capacity)
      throw ConfigError("vocab_size must lie in [2, " +
                        std::to_string(capacity) + "] for " +
                        std::to_string(num_phones) + " phones");
    if (num_utterances < 10)
      throw ConfigError("need at least 10 utterances to split 70/10/20");
    if (min_words < 1 || max_words < min_words)
      throw ConfigError("need max_words >= min_words >= 1");
    if (min_frames < 1 || max_frames < min_frames)
      throw ConfigError("need max_frames >= min_frames >= 1");
    if (feature_dim < 2 * num_phones)
      throw ConfigError("feature_dim must cover two dims per phone");
    if (template_gain <= 0.0) throw ConfigError("template_gain must be > 0");
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  }
};

struct SynthSummary {
  std::size_t train_count = 0;
  std::size_t dev_count = 0;
  std::size_t test_count = 0;
  std::size_t char_count = 0;   // symbols written to chars.txt
  std::size_t phone_count = 0;  // symbols written to phones.txt
  std::size_t total_frames = 0;
};

namespace detail {

// Word-initial phone p spells as one letter; word-internal phone p spells as
// a two-letter digraph.  Every letter belongs to exactly one phone, so word
// text determines the pronunciation.
inline std::string phone_spelling(const SynthSpec& spec, std::size_t phone) {
  std::size_t a = spec.initial_phones(), b = spec.internal_phones();
  if (phone < a) return std::string(1, static_cast<char>('a' + phone));
  std::size_t j = phone - a;
  std::string s;
  s += static_cast<char>('a' + a + j);
  s += static_cast<char>('a' + a + b + j);
  return s;
}

inline std::string phone_name(std::size_t phone) {
  return std::string(1, static_cast<char>('A' + phone));
}

}  // namespace detail

// Generates the corpus under out_dir: features/*.fbnk, train/dev/test.jsonl,
// chars.txt, phones.txt and lexicon.tsv.  Everything is a pure function of
// the spec, so rerunning with the same spec reproduces every byte.
inline SynthSummary generate_synthetic_corpus(const SynthSpec& spec,
                                              const std::string& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "features");

  std::size_t a = spec.initial_phones(), b = spec.internal_phones();
  Rng rng(spec.seed);

  // Vocabulary: unique pronunciations, first phone word-initial, the rest
  // word-internal with no immediate repeats.
  std::vector<std::vector<std::size_t>> prons;
  std::set<std::vector<std::size_t>> seen;
  while (prons.size() < spec.vocab_size) {
    std::size_t len = static_cast<std::size_t>(rng.uniform_int(1, 3));
    std::vector<std::size_t> pron;
    pron.push_back(static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(a) - 1)));
    while (pron.size() < len) {
      std::size_t q = a + static_cast<std::size_t>(
                              rng.uniform_int(0, static_cast<int>(b) - 1));
      if (q == pron.back()) continue;
      pron.push_back(q);
    }
    if (seen.insert(pron).second) prons.push_back(std::move(pron));
  }

  std::vector<std::string> words;
  for (const auto& pron : prons) {
    std::string text;
    for (std::size_t p : pron) text += detail::phone_spelling(spec, p);
    words.push_back(std::move(text));
  }

  {
    std::ofstream chars((fs::path(out_dir) / "chars.txt").string());
    for (std::size_t k = 0; k < a + 2 * b; ++k)
      chars << static_cast<char>('a' + k) << "\n";
    std::ofstream phones((fs::path(out_dir) / "phones.txt").string());
    for (std::size_t p = 0; p < spec.num_phones; ++p)
      phones << detail::phone_name(p) << "\n";
    std::ofstream lex((fs::path(out_dir) / "lexicon.tsv").string());
    for (std::size_t w = 0; w < words.size(); ++w) {
      lex << words[w] << "\t";
      for (std::size_t k = 0; k < prons[w].size(); ++k)
        lex << (k ? " " : "") << detail::phone_name(prons[w][k]);
      lex << "\n";
    }
    if (!chars || !phones || !lex)
      throw DataError("failed writing alphabet or lexicon under " + out_dir);
  }

  SynthSummary summary;
  summary.char_count = a + 2 * b;
  summary.phone_count = spec.num_phones;

  Manifest all;
  for (std::size_t i = 0; i < spec.num_utterances; ++i) {
    std::ostringstream id;
    id << "utt_" << std::setw(4) << std::setfill('0') << i;

    std::size_t n_words = static_cast<std::size_t>(rng.uniform_int(
        static_cast<int>(spec.min_words), static_cast<int>(spec.max_words)));
    std::vector<std::size_t> picks;
    std::string transcript;
    for (std::size_t w = 0; w < n_words; ++w) {
      std::size_t v = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(words.size()) - 1));
      picks.push_back(v);
      if (w) transcript += " ";
      transcript += words[v];
    }

    // Segment plan: phones of word 0, gap, phones of word 1, ...  A segment
    // of phone p lights dims 2p and 2p+1; a gap lights nothing.
    std::vector<int> segments;  // phone id, or -1 for a gap
    for (std::size_t w = 0; w < picks.size(); ++w) {
      if (w) segments.push_back(-1);
      for (std::size_t p : prons[picks[w]])
        segments.push_back(static_cast<int>(p));
    }

    std::size_t total = 0;
    std::vector<std::size_t> lengths;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      std::size_t n = static_cast<std::size_t>(
          rng.uniform_int(static_cast<int>(spec.min_frames),
                          static_cast<int>(spec.max_frames)));
      lengths.push_back(n);
      total += n;
    }

    Matrix frames(total, spec.feature_dim);
    for (std::size_t r = 0; r < frames.rows(); ++r)
      for (std::size_t c = 0; c < frames.cols(); ++c)
        frames(r, c) = spec.noise_sigma * rng.gaussian();
    std::size_t row = 0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (segments[s] >= 0) {
        std::size_t band = 2 * static_cast<std::size_t>(segments[s]);
        for (std::size_t r = row; r < row + lengths[s]; ++r) {
          frames(r, band) += spec.template_gain;
          frames(r, band + 1) += spec.template_gain;
        }
      }
      row += lengths[s];
    }
    summary.total_frames += total;

    FeatureMatrix fm;
    fm.utterance_id = id.str();
    fm.frames = std::move(frames);
    std::string rel = "features/" + id.str() + ".fbnk";
    write_feature_cache((fs::path(out_dir) / rel).string(), fm);

    ManifestEntry entry;
    entry.utterance_id = id.str();
    entry.feature_path = rel;
    entry.transcript = transcript;
    entry.word_count = n_words;
    all.entries.push_back(std::move(entry));
  }

  std::size_t train_n = spec.num_utterances * 70 / 100;
  std::size_t dev_n = spec.num_utterances * 10 / 100;
  Manifest train, dev, test;
  for (std::size_t i = 0; i < all.entries.size(); ++i) {
    Manifest& part = i < train_n           ? train
                     : i < train_n + dev_n ? dev
                                           : test;
    part.entries.push_back(all.entries[i]);
  }
  save_manifest(train, (fs::path(out_dir) / "train.jsonl").string());
  save_manifest(dev, (fs::path(out_dir) / "dev.jsonl").string());
  save_manifest(test, (fs::path(out_dir) / "test.jsonl").string());

  summary.train_count = train.entries.size();
  summary.dev_count = dev.entries.size();
  summary.test_count = test.entries.size();
  return summary;
}

}  // namespace tinyasr

#endif  // TINYASR_SYNTH_HPP_
