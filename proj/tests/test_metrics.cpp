// tests/test_metrics.cpp

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

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "tinyasr/metrics.hpp"
#include "tinyasr/rng.hpp"

using namespace tinyasr;

namespace {

// Exponential-time reference for small inputs.
std::size_t slow_edit(const std::vector<int>& a, const std::vector<int>& b,
                      std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  std::size_t best = slow_edit(a, b, i + 1, j) + 1;
  best = std::min(best, slow_edit(a, b, i, j + 1) + 1);
  best = std::min(best,
                  slow_edit(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1));
  return best;
}

std::vector<int> chars(const std::string& s) {
  std::vector<int> out;
  for (char c : s) out.push_back(c);
  return out;
}

std::vector<int> random_seq(Rng& rng, std::size_t max_len, int vocab) {
  std::vector<int> out(rng.next_u64() % (max_len + 1));
  for (auto& v : out) v = static_cast<int>(rng.next_u64() % vocab);
  return out;
}

EvalPair pair_of(std::vector<int> ref, std::vector<int> hyp, int word_count,
                 const std::string& id = "u") {
  EvalPair p;
  p.reference = std::move(ref);
  p.hypothesis = std::move(hyp);
  p.word_count = word_count;
  p.utterance_id = id;
  return p;
}

}  // namespace

TEST_CASE("edit distance on pinned pairs") {
  CHECK(edit_distance({1, 2, 3}, {1, 2, 3}) == 0);
  CHECK(edit_distance(chars("kitten"), chars("sitting")) == 3);
  CHECK(edit_distance(chars("kitten"), chars("sitting")) ==
        slow_edit(chars("kitten"), chars("sitting")));
  CHECK(edit_distance({1, 2, 3, 4}, {}) == 4);
  CHECK(edit_distance({}, {7}) == 1);
  CHECK(edit_distance({}, {}) == 0);
}

TEST_CASE("edit distance agrees with exhaustive search on small inputs") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_seq(rng, 6, 3);
    auto b = random_seq(rng, 6, 3);
    CHECK(edit_distance(a, b) == slow_edit(a, b));
  }
}

TEST_CASE("edit distance metric properties") {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_seq(rng, 10, 4);
    auto b = random_seq(rng, 10, 4);
    auto c = random_seq(rng, 10, 4);
    std::size_t ab = edit_distance(a, b);
    std::size_t ba = edit_distance(b, a);
    std::size_t bc = edit_distance(b, c);
    std::size_t ac = edit_distance(a, c);
    CHECK(ab == ba);
    CHECK(ac <= ab + bc);
    std::size_t lo = a.size() > b.size() ? a.size() - b.size()
                                         : b.size() - a.size();
    CHECK(ab >= lo);
    CHECK(ab <= std::max(a.size(), b.size()));
  }
}

TEST_CASE("pooled error rate") {
  std::vector<EvalPair> all_correct{
      pair_of({1, 2, 3}, {1, 2, 3}, 1),
      pair_of({4, 5}, {4, 5}, 1),
  };
  CHECK(error_rate(all_correct) == 0.0);

  std::vector<EvalPair> kitten{
      pair_of(chars("kitten"), chars("sitting"), 1)};
  CHECK(error_rate(kitten) == Catch::Approx(50.0).epsilon(1e-12));

  std::vector<EvalPair> deleted{pair_of({1, 2, 3, 4, 5}, {}, 1)};
  CHECK(error_rate(deleted) == Catch::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_AS(error_rate({}), UsageError);

  std::vector<EvalPair> empty_ref{pair_of({}, {1}, 1, "bad_utt")};
  CHECK_THROWS_AS(error_rate(empty_ref), DataError);
}

TEST_CASE("pooled rate equals length-weighted mean of per-utterance rates") {
  Rng rng(202);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 40; ++i) {
    auto ref = random_seq(rng, 12, 5);
    if (ref.empty()) ref.push_back(0);
    pairs.push_back(pair_of(ref, random_seq(rng, 12, 5), 1));
  }
  double pooled = error_rate(pairs);

  double weighted = 0.0, total_len = 0.0;
  for (const auto& p : pairs) {
    double r = 100.0 *
               static_cast<double>(edit_distance(p.reference, p.hypothesis)) /
               static_cast<double>(p.reference.size());
    weighted += r * static_cast<double>(p.reference.size());
    total_len += static_cast<double>(p.reference.size());
  }
  CHECK(pooled == Catch::Approx(weighted / total_len).margin(1e-12));
}

TEST_CASE("bucketing by reference word count") {
  BucketSpec spec = BucketSpec::standard();

  std::vector<EvalPair> pairs{
      pair_of({1}, {1}, 15, "edge15"), pair_of({1}, {1}, 16, "edge16"),
      pair_of({1}, {1}, 3, "lo3"),     pair_of({1}, {1}, 60, "hi60"),
      pair_of({1}, {1}, 2, "tiny2"),   pair_of({1}, {1}, 61, "big61"),
  };
  BucketedPairs buckets = bucket_by_length(pairs, spec);

  REQUIRE(buckets.names ==
          std::vector<std::string>{"Test1", "Test2", "Test3", "other"});
  CHECK(buckets.pairs.at("Test1").size() == 2);  // 15 and 3
  CHECK(buckets.pairs.at("Test2").size() == 1);  // 16
  CHECK(buckets.pairs.at("Test3").size() == 1);  // 60
  CHECK(buckets.pairs.at("other").size() == 2);  // 2 and 61
  CHECK(buckets.out_of_range == 2);
  CHECK(buckets.overall.size() == pairs.size());
  CHECK(buckets.pairs.at("Test1")[0].utterance_id == "edge15");
}

TEST_CASE("bucketing reproduces the standard partition sizes") {
  // 957 / 719 / 460 utterances across the three length bands
  std::vector<EvalPair> pairs;
  Rng rng(5);
  auto push_range = [&](int count, int lo, int hi) {
    for (int i = 0; i < count; ++i)
      pairs.push_back(
          pair_of({1}, {1}, lo + static_cast<int>(rng.next_u64() % (hi - lo + 1))));
  };
  push_range(957, 3, 15);
  push_range(719, 16, 25);
  push_range(460, 26, 60);

  BucketedPairs buckets = bucket_by_length(pairs, BucketSpec::standard());
  CHECK(buckets.pairs.at("Test1").size() == 957);
  CHECK(buckets.pairs.at("Test2").size() == 719);
  CHECK(buckets.pairs.at("Test3").size() == 460);
  CHECK(buckets.out_of_range == 0);
  CHECK(buckets.names ==
        std::vector<std::string>{"Test1", "Test2", "Test3"});
}

TEST_CASE("bucketing partitions: every pair lands in exactly one bucket") {
  Rng rng(66);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 300; ++i)
    pairs.push_back(pair_of({1}, {}, static_cast<int>(rng.next_u64() % 70)));
  BucketedPairs buckets = bucket_by_length(pairs, BucketSpec::standard());
  std::size_t total = 0;
  for (const auto& [name, group] : buckets.pairs) total += group.size();
  CHECK(total == pairs.size());
  CHECK(buckets.overall.size() == pairs.size());
}

TEST_CASE("overlapping bucket spec rejected") {
  BucketSpec bad{{{3, 15, "A"}, {15, 25, "B"}}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  BucketSpec reversed{{{16, 25, "B"}, {3, 15, "A"}}};
  CHECK_THROWS_AS(reversed.validate(), ConfigError);
  BucketSpec inverted{{{15, 3, "A"}}};
  CHECK_THROWS_AS(inverted.validate(), ConfigError);
}

TEST_CASE("report renders pooled averages from bucket tallies") {
  // per-bucket edit counts over 10000-token references; the Average column
  // must pool the utterances, giving 21.92 for the first row
  auto tally = [](std::uint64_t edits, std::uint64_t ref_len) {
    Tally t;
    t.edits = edits;
    t.ref_len = ref_len;
    return t;
  };

  std::vector<ModelRow> rows{
      {"attention", "PER",
       {{"Test1", tally(2101, 10000)},
        {"Test2", tally(2106, 10000)},
        {"Test3", tally(2370, 10000)}}},
      {"ctc", "PER",
       {{"Test1", tally(3291, 10000)},
        {"Test2", tally(2889, 10000)},
        {"Test3", tally(2833, 10000)}}},
  };
  Report report = make_report(rows, {"Test1", "Test2", "Test3"});

  CHECK(report.csv.find("model,bucket,metric,value\n") == 0);
  CHECK(report.csv.find("attention,Test1,PER,21.01") != std::string::npos);
  CHECK(report.csv.find("attention,Test2,PER,21.06") != std::string::npos);
  CHECK(report.csv.find("attention,Test3,PER,23.70") != std::string::npos);
  CHECK(report.csv.find("attention,Average,PER,21.92") != std::string::npos);
  CHECK(report.csv.find("ctc,Average,PER,30.04") != std::string::npos);
  CHECK(report.text.find("21.92") != std::string::npos);
  CHECK(report.text.find("Average") != std::string::npos);

  // determinism: identical inputs give byte-identical output
  Report again = make_report(rows, {"Test1", "Test2", "Test3"});
  CHECK(report.csv == again.csv);
  CHECK(report.text == again.text);
}

TEST_CASE("report minimal case and missing buckets") {
  std::vector<ModelRow> rows{{"m", "CER", {{"B", Tally{5, 100}}}}};
  Report report = make_report(rows, {"B"});
  CHECK(report.csv.find("m,B,CER,5.00") != std::string::npos);
  CHECK(report.csv.find("m,Average,CER,5.00") != std::string::npos);

  // a bucket with no tallies renders as "-" and stays out of the CSV
  Report sparse = make_report(rows, {"B", "C"});
  CHECK(sparse.csv.find(",C,") == std::string::npos);
  CHECK(sparse.text.find("-") != std::string::npos);

  CHECK_THROWS_AS(make_report(rows, {}), UsageError);
}

TEST_CASE("average pools rather than averages bucket rates") {
  // rates 10.00 and 50.00 with very different weights: pooled average is
  // (10 + 50)/(100 + 1000) != (10% + 5%)/2
  std::vector<ModelRow> rows{
      {"m", "PER", {{"A", Tally{10, 100}}, {"B", Tally{50, 1000}}}}};
  Report report = make_report(rows, {"A", "B"});
  CHECK(report.csv.find("m,A,PER,10.00") != std::string::npos);
  CHECK(report.csv.find("m,B,PER,5.00") != std::string::npos);
  CHECK(report.csv.find("m,Average,PER,5.45") != std::string::npos);
}
