// tests/test_targets.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tinyasr/rng.hpp"
#include "tinyasr/targets.hpp"

using namespace tinyasr;

namespace {

std::string data_path(const std::string& name) {
  return std::string(TINYASR_DATA_DIR) + "/" + name;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& contents)
      : path((std::filesystem::temp_directory_path() / name).string()) {
    std::ofstream os(path, std::ios::binary);
    os << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

Alphabet tiny_reduced() {
  return Alphabet({"g", "oo", "h", "m", "k", "ae", "t", "_"},
                  Scheme::kReduced);
}

Alphabet tiny_unified() {
  return Alphabet({"g", "o", "h", "m", "e", "a", "घ", "र", "_"},
                  Scheme::kUnified);
}

}  // namespace

TEST_CASE("full inventories load with the documented sizes") {
  Alphabet unified =
      load_alphabet(data_path("alphabet_unified.txt"), Scheme::kUnified, true);
  Alphabet reduced =
      load_alphabet(data_path("alphabet_reduced.txt"), Scheme::kReduced, true);
  CHECK(unified.size() == 95);
  CHECK(reduced.size() == 63);
  CHECK(reduced.size() < unified.size());
  CHECK(unified.symbol(unified.separator_id()) == "_");
  CHECK(unified.separator_id() == 94);  // appended last
  CHECK(unified.blank_id() == 95);
  CHECK(reduced.blank_id() == 63);

  // the loaders are deterministic; hashes distinguish the two inventories
  CHECK(unified.content_hash() !=
        reduced.content_hash());
  CHECK(unified.content_hash() ==
        load_alphabet(data_path("alphabet_unified.txt"), Scheme::kUnified)
            .content_hash());
}

TEST_CASE("alphabet loader rejects duplicates, empties, strict size drift") {
  TempFile dup("tinyasr_alpha_dup.txt", "a\nb\na\n");
  try {
    load_alphabet(dup.path, Scheme::kUnified);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  TempFile empty("tinyasr_alpha_empty.txt", "");
  CHECK_THROWS_AS(load_alphabet(empty.path, Scheme::kUnified), DataError);

  TempFile sep("tinyasr_alpha_sep.txt", "a\n_\n");
  CHECK_THROWS_AS(load_alphabet(sep.path, Scheme::kUnified), DataError);

  TempFile small("tinyasr_alpha_small.txt", "a\nb\nc\n");
  CHECK_THROWS_AS(load_alphabet(small.path, Scheme::kUnified, true),
                  DataError);
  CHECK(load_alphabet(small.path, Scheme::kUnified).size() == 4);
}

TEST_CASE("lexicon parsing, validation and duplicate policy") {
  Alphabet reduced = tiny_reduced();

  TempFile good("tinyasr_lex_good.tsv", "cat\tk ae t\ngo\tg oo\n");
  Lexicon lex = load_lexicon(good.path, reduced);
  CHECK(lex.entries.size() == 2);
  CHECK(lex.pronunciation("cat") ==
        std::vector<int>{*reduced.find("k"), *reduced.find("ae"),
                         *reduced.find("t")});
  CHECK(lex.duplicate_count == 0);

  TempFile unk("tinyasr_lex_unk.tsv", "cat\tk zz t\n");
  try {
    load_lexicon(unk.path, reduced);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("zz") != std::string::npos);
    CHECK(msg.find("cat") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
  }

  TempFile dup("tinyasr_lex_dup.tsv", "go\tg oo\ngo\tg oo h\n");
  std::ostringstream warnings;
  Lexicon dlex = load_lexicon(dup.path, reduced, &warnings);
  CHECK(dlex.duplicate_count == 1);
  CHECK(dlex.pronunciation("go").size() == 3);  // last wins
  CHECK(warnings.str().find("duplicate") != std::string::npos);

  TempFile noproc("tinyasr_lex_empty.tsv", "go\t\n");
  CHECK_THROWS_AS(load_lexicon(noproc.path, reduced), DataError);

  TempFile badsep("tinyasr_lex_sep.tsv", "go\tg _\n");
  CHECK_THROWS_AS(load_lexicon(badsep.path, reduced), DataError);
}

TEST_CASE("unified tokenization expands characters with separators between") {
  Alphabet alpha = tiny_unified();

  LabelSequence seq = tokenize_unified("go home", alpha);
  std::vector<int> want{*alpha.find("g"), *alpha.find("o"),
                        alpha.separator_id(), *alpha.find("h"),
                        *alpha.find("o"), *alpha.find("m"),
                        *alpha.find("e")};
  CHECK(seq.ids == want);
  CHECK(seq.scheme == Scheme::kUnified);

  CHECK(tokenize_unified("a", alpha).ids == std::vector<int>{*alpha.find("a")});

  // Devanagari word splits into codepoints
  LabelSequence hindi = tokenize_unified("घर", alpha);
  CHECK(hindi.ids ==
        std::vector<int>{*alpha.find("घ"), *alpha.find("र")});

  try {
    tokenize_unified("gq", alpha);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("q") != std::string::npos);
    CHECK(msg.find("gq") != std::string::npos);
  }

  CHECK_THROWS_AS(tokenize_unified("   ", alpha), DataError);
}

TEST_CASE("reduced tokenization joins pronunciations with separators") {
  Alphabet reduced = tiny_reduced();
  Lexicon lex;
  lex.entries["go"] = {*reduced.find("g"), *reduced.find("oo")};
  lex.entries["home"] = {*reduced.find("h"), *reduced.find("oo"),
                         *reduced.find("m")};

  LabelSequence seq = tokenize_reduced("go home", lex, reduced);
  std::vector<int> want{*reduced.find("g"), *reduced.find("oo"),
                        reduced.separator_id(), *reduced.find("h"),
                        *reduced.find("oo"), *reduced.find("m")};
  CHECK(seq.ids == want);
  CHECK(seq.scheme == Scheme::kReduced);

  CHECK(tokenize_reduced("go", lex, reduced).ids ==
        std::vector<int>{*reduced.find("g"), *reduced.find("oo")});

  try {
    tokenize_reduced("go away", lex, reduced);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("away") != std::string::npos);
  }
}

TEST_CASE("words from different scripts share reduced targets") {
  Alphabet reduced = tiny_reduced();
  Lexicon lex;
  // an English spelling and a Devanagari spelling that sound alike
  lex.entries["go"] = {*reduced.find("g"), *reduced.find("oo")};
  lex.entries["गो"] = {*reduced.find("g"), *reduced.find("oo")};

  LabelSequence seq = tokenize_reduced("go गो", lex, reduced);
  int oo = *reduced.find("oo");
  CHECK(seq.ids[1] == oo);
  CHECK(seq.ids[4] == oo);  // same target id across scripts
}

TEST_CASE("detokenize inverts unified tokenization") {
  Alphabet alpha = tiny_unified();

  LabelSequence seq = tokenize_unified("go home", alpha);
  auto words = detokenize(seq, alpha);
  CHECK(words == std::vector<std::string>{"go", "home"});

  LabelSequence one;
  one.ids = {*alpha.find("a")};
  CHECK(detokenize(one, alpha) == std::vector<std::string>{"a"});

  // random in-alphabet sentences round-trip
  std::vector<std::string> letters{"g", "o", "h", "m", "e", "a",
                                   "घ", "र"};
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t num_words = 1 + rng.next_u64() % 20;
    std::vector<std::string> sentence_words;
    for (std::size_t w = 0; w < num_words; ++w) {
      std::size_t len = 1 + rng.next_u64() % 5;
      std::string word;
      for (std::size_t i = 0; i < len; ++i)
        word += letters[rng.next_u64() % letters.size()];
      sentence_words.push_back(word);
    }
    std::string sentence = join_words(sentence_words);
    LabelSequence ids = tokenize_unified(sentence, alpha);
    CHECK(join_words(detokenize(ids, alpha)) == sentence);
  }
}

TEST_CASE("label sequence invariants under random sentences") {
  Alphabet reduced = tiny_reduced();
  Lexicon lex;
  lex.entries["go"] = {*reduced.find("g"), *reduced.find("oo")};
  lex.entries["home"] = {*reduced.find("h"), *reduced.find("oo"),
                         *reduced.find("m")};
  lex.entries["cat"] = {*reduced.find("k"), *reduced.find("ae"),
                        *reduced.find("t")};
  std::vector<std::string> vocab{"go", "home", "cat"};

  Rng rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t num_words = 1 + rng.next_u64() % 20;
    std::vector<std::string> words;
    std::size_t pron_total = 0;
    for (std::size_t w = 0; w < num_words; ++w) {
      words.push_back(vocab[rng.next_u64() % vocab.size()]);
      pron_total += lex.entries[words.back()].size();
    }
    LabelSequence seq = tokenize_reduced(join_words(words), lex, reduced);

    CHECK(seq.ids.size() == pron_total + num_words - 1);
    CHECK(seq.ids.front() != reduced.separator_id());
    CHECK(seq.ids.back() != reduced.separator_id());
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
      CHECK(seq.ids[i] != reduced.blank_id());
      if (i > 0 && seq.ids[i] == reduced.separator_id())
        CHECK(seq.ids[i - 1] != reduced.separator_id());
    }
  }
}

TEST_CASE("label sequence validation catches malformed input") {
  Alphabet alpha = tiny_unified();
  int sep = alpha.separator_id();
  int a = *alpha.find("a");

  auto check_bad = [&alpha](std::vector<int> ids) {
    LabelSequence seq{std::move(ids), Scheme::kUnified};
    CHECK_THROWS_AS(seq.validate(alpha), DataError);
  };
  check_bad({});
  check_bad({sep, a});
  check_bad({a, sep});
  check_bad({a, sep, sep, a});
  check_bad({a, alpha.blank_id()});

  LabelSequence ok{{a, sep, a}, Scheme::kUnified};
  CHECK_NOTHROW(ok.validate(alpha));
}

TEST_CASE("target set statistics reproduce the documented reduction") {
  Alphabet unified =
      load_alphabet(data_path("alphabet_unified.txt"), Scheme::kUnified, true);
  Alphabet reduced =
      load_alphabet(data_path("alphabet_reduced.txt"), Scheme::kReduced, true);
  TargetSetStats stats = target_set_stats(unified, reduced);
  CHECK(stats.unified_size == 95);
  CHECK(stats.reduced_size == 63);
  CHECK(stats.reduction_percent == 33.7);  // commonly quoted as 34%

  // sizes seen on a small word list: 22 character targets vs 12 phone targets
  std::vector<std::string> char22, phone12;
  for (int i = 0; i < 21; ++i) char22.push_back("c" + std::to_string(i));
  char22.push_back("_");
  for (int i = 0; i < 11; ++i) phone12.push_back("p" + std::to_string(i));
  phone12.push_back("_");
  TargetSetStats small = target_set_stats(
      Alphabet(char22, Scheme::kUnified), Alphabet(phone12, Scheme::kReduced));
  CHECK(small.reduction_percent == 45.5);

  TargetSetStats zero = target_set_stats(
      Alphabet(char22, Scheme::kUnified), Alphabet(char22, Scheme::kReduced));
  CHECK(zero.reduction_percent == 0.0);
}

TEST_CASE("utf8 codepoint splitting") {
  auto cps = utf8_codepoints("aगोz");
  REQUIRE(cps.size() == 4);
  CHECK(cps[0] == "a");
  CHECK(cps[1] == "ग");
  CHECK(cps[2] == "ो");
  CHECK(cps[3] == "z");

  CHECK_THROWS_AS(utf8_codepoints("\xff"), DataError);
  CHECK_THROWS_AS(utf8_codepoints(std::string("\xe0\xa4", 2)), DataError);
}
