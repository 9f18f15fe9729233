// tinyasr/targets.hpp

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

#ifndef TINYASR_TARGETS_HPP_
#define TINYASR_TARGETS_HPP_

// Target inventories and tokenization.  Two schemes exist: "unified" splits
// words into characters of a joint bilingual character set, "reduced" maps
// words through a pronunciation lexicon onto a shared phone set.  Both use a
// word-separator token; CTC blank is a reserved extra index past the alphabet.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tinyasr/common.hpp"

namespace tinyasr {

enum class Scheme { kUnified, kReduced };

inline std::string scheme_name(Scheme s) {
  return s == Scheme::kUnified ? "unified" : "reduced";
}

inline Scheme scheme_from_name(const std::string& name) {
  if (name == "unified") return Scheme::kUnified;
  if (name == "reduced") return Scheme::kReduced;
  throw ConfigError("unknown target scheme: " + name);
}

inline constexpr const char* kSeparatorSymbol = "_";

class Alphabet {
 public:
  Alphabet(std::vector<std::string> symbols, Scheme scheme)
      : symbols_(std::move(symbols)), scheme_(scheme) {
    if (symbols_.empty()) throw DataError("alphabet has no symbols");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (symbols_[i].empty()) throw DataError("alphabet has an empty symbol");
      auto [it, fresh] = index_.emplace(symbols_[i], static_cast<int>(i));
      if (!fresh)
        throw DataError("duplicate alphabet symbol: " + symbols_[i]);
    }
    auto sep = index_.find(kSeparatorSymbol);
    if (sep == index_.end())
      throw DataError("alphabet is missing the word separator");
    separator_id_ = sep->second;
  }

  std::size_t size() const { return symbols_.size(); }
  Scheme scheme() const { return scheme_; }
  int separator_id() const { return separator_id_; }

  // Index reserved for the CTC blank; one past the last real symbol, so a
  // CTC output layer has size() + 1 classes.
  int blank_id() const { return static_cast<int>(symbols_.size()); }

  const std::string& symbol(int id) const {
    if (id < 0 || id >= static_cast<int>(symbols_.size()))
      throw UsageError("symbol id out of range: " + std::to_string(id));
    return symbols_[static_cast<std::size_t>(id)];
  }

  std::optional<int> find(const std::string& symbol) const {
    auto it = index_.find(symbol);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // FNV-1a over the symbol list; lets checkpoints detect alphabet drift.
  std::uint64_t content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto eat = [&h](unsigned char c) {
      h ^= c;
      h *= 1099511628211ull;
    };
    for (const auto& s : symbols_) {
      for (unsigned char c : s) eat(c);
      eat('\n');
    }
    return h;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  Scheme scheme_;
  int separator_id_;
};

// Reads one symbol per line; the word separator is appended by the loader and
// must not appear in the file.  With strict=true the full-inventory sizes are
// enforced: 95 unified targets, 63 reduced targets, separator included.
inline Alphabet load_alphabet(const std::string& path, Scheme scheme,
                              bool strict = false) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open alphabet file: " + path);
  std::vector<std::string> symbols;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kSeparatorSymbol)
      throw DataError("separator must not be listed in " + path + " (line " +
                      std::to_string(line_no) + "); it is appended implicitly");
    for (const auto& seen : symbols)
      if (seen == line)
        throw DataError("duplicate symbol \"" + line + "\" at line " +
                        std::to_string(line_no) + " of " + path);
    symbols.push_back(line);
  }
  if (symbols.empty()) throw DataError("alphabet file is empty: " + path);
  symbols.push_back(kSeparatorSymbol);

  if (strict) {
    std::size_t want = scheme == Scheme::kUnified ? 95 : 63;
    if (symbols.size() != want)
      throw DataError("alphabet " + path + " has " +
                      std::to_string(symbols.size()) + " targets, expected " +
                      std::to_string(want) + " for the " + scheme_name(scheme) +
                      " scheme");
  }
  return Alphabet(std::move(symbols), scheme);
}

struct Lexicon {
  // word -> pronunciation as reduced-alphabet ids
  std::map<std::string, std::vector<int>> entries;
  std::size_t duplicate_count = 0;

  const std::vector<int>& pronunciation(const std::string& word) const {
    auto it = entries.find(word);
    if (it == entries.end())
      throw DataError("word not in lexicon: " + word);
    return it->second;
  }
};

// TSV "word<TAB>phone phone ...".  Duplicate words: the last line wins; each
// duplicate is counted and optionally reported on warn_stream.
inline Lexicon load_lexicon(const std::string& path, const Alphabet& alphabet,
                            std::ostream* warn_stream = nullptr) {
  if (alphabet.scheme() != Scheme::kReduced)
    throw UsageError("lexicon pronunciations target the reduced alphabet");
  std::ifstream is(path);
  if (!is) throw DataError("cannot open lexicon file: " + path);

  Lexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw DataError("expected \"word<TAB>phones\" at line " +
                      std::to_string(line_no) + " of " + path);
    std::string word = line.substr(0, tab);
    std::istringstream phones(line.substr(tab + 1));
    std::vector<int> ids;
    std::string phone;
    while (phones >> phone) {
      auto id = alphabet.find(phone);
      if (!id)
        throw DataError("unknown phone \"" + phone + "\" for word \"" + word +
                        "\" at line " + std::to_string(line_no) + " of " +
                        path);
      if (*id == alphabet.separator_id())
        throw DataError("separator used as phone for word \"" + word +
                        "\" at line " + std::to_string(line_no) + " of " +
                        path);
      ids.push_back(*id);
    }
    if (ids.empty())
      throw DataError("empty pronunciation for word \"" + word + "\" at line " +
                      std::to_string(line_no) + " of " + path);
    auto [it, fresh] = lex.entries.insert_or_assign(std::move(word),
                                                    std::move(ids));
    if (!fresh) {
      ++lex.duplicate_count;
      if (warn_stream)
        *warn_stream << "warning: duplicate lexicon entry for \"" << it->first
                     << "\" at line " << line_no << "; keeping the last\n";
    }
  }
  if (lex.entries.empty()) throw DataError("lexicon file is empty: " + path);
  return lex;
}

struct LabelSequence {
  std::vector<int> ids;
  Scheme scheme = Scheme::kUnified;

  void validate(const Alphabet& alphabet) const {
    if (ids.empty()) throw DataError("label sequence is empty");
    int prev = -1;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      int id = ids[i];
      if (id < 0 || id >= static_cast<int>(alphabet.size()))
        throw DataError("label id out of range: " + std::to_string(id));
      if (id == alphabet.blank_id())
        throw DataError("blank id inside a label sequence");
      if (id == alphabet.separator_id()) {
        if (i == 0 || i + 1 == ids.size() || prev == id)
          throw DataError("separator misplaced in label sequence");
      }
      prev = id;
    }
  }
};

// Splits a UTF-8 string into codepoint substrings.
inline std::vector<std::string> utf8_codepoints(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((lead & 0x80) == 0x00)
      len = 1;
    else if ((lead & 0xe0) == 0xc0)
      len = 2;
    else if ((lead & 0xf0) == 0xe0)
      len = 3;
    else if ((lead & 0xf8) == 0xf0)
      len = 4;
    else
      throw DataError("malformed UTF-8 byte in \"" + text + "\"");
    if (i + len > text.size())
      throw DataError("truncated UTF-8 sequence in \"" + text + "\"");
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(text[i + k]) & 0xc0) != 0x80)
        throw DataError("malformed UTF-8 continuation in \"" + text + "\"");
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

inline std::vector<std::string> split_words(const std::string& sentence) {
  std::vector<std::string> words;
  std::istringstream ss(sentence);
  std::string w;
  while (ss >> w) words.push_back(std::move(w));
  return words;
}

inline LabelSequence tokenize_unified(const std::string& sentence,
                                      const Alphabet& alphabet) {
  if (alphabet.scheme() != Scheme::kUnified)
    throw UsageError("tokenize_unified needs a unified alphabet");
  auto words = split_words(sentence);
  if (words.empty()) throw DataError("cannot tokenize an empty sentence");

  LabelSequence seq;
  seq.scheme = Scheme::kUnified;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) seq.ids.push_back(alphabet.separator_id());
    for (const auto& ch : utf8_codepoints(words[w])) {
      auto id = alphabet.find(ch);
      if (!id || *id == alphabet.separator_id())
        throw DataError("character \"" + ch + "\" of word \"" + words[w] +
                        "\" is not in the unified alphabet");
      seq.ids.push_back(*id);
    }
  }
  seq.validate(alphabet);
  return seq;
}

inline LabelSequence tokenize_reduced(const std::string& sentence,
                                      const Lexicon& lexicon,
                                      const Alphabet& alphabet) {
  if (alphabet.scheme() != Scheme::kReduced)
    throw UsageError("tokenize_reduced needs a reduced alphabet");
  auto words = split_words(sentence);
  if (words.empty()) throw DataError("cannot tokenize an empty sentence");

  LabelSequence seq;
  seq.scheme = Scheme::kReduced;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) seq.ids.push_back(alphabet.separator_id());
    auto it = lexicon.entries.find(words[w]);
    if (it == lexicon.entries.end())
      throw DataError("out-of-vocabulary word: \"" + words[w] + "\"");
    seq.ids.insert(seq.ids.end(), it->second.begin(), it->second.end());
  }
  seq.validate(alphabet);
  return seq;
}

// Splits on the separator and joins each word's token strings.
inline std::vector<std::string> detokenize(const LabelSequence& labels,
                                           const Alphabet& alphabet) {
  labels.validate(alphabet);
  std::vector<std::string> words(1);
  for (int id : labels.ids) {
    if (id == alphabet.separator_id())
      words.emplace_back();
    else
      words.back() += alphabet.symbol(id);
  }
  return words;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

struct TargetSetStats {
  std::size_t unified_size = 0;
  std::size_t reduced_size = 0;
  double reduction_percent = 0.0;  // rounded to one decimal
};

inline TargetSetStats target_set_stats(const Alphabet& unified,
                                       const Alphabet& reduced) {
  TargetSetStats stats;
  stats.unified_size = unified.size();
  stats.reduced_size = reduced.size();
  double raw = 100.0 *
               (static_cast<double>(unified.size()) -
                static_cast<double>(reduced.size())) /
               static_cast<double>(unified.size());
  stats.reduction_percent = std::round(raw * 10.0) / 10.0;
  return stats;
}

}  // namespace tinyasr

#endif  // TINYASR_TARGETS_HPP_
