// tinyasr/metrics.hpp

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

#ifndef TINYASR_METRICS_HPP_
#define TINYASR_METRICS_HPP_

// Corpus-level PER/CER scoring: Levenshtein distance, pooled error rates,
// utterance-length bucketing, and report rendering (text table + CSV).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "tinyasr/common.hpp"
#include "tinyasr/targets.hpp"

namespace tinyasr {

struct EvalPair {
  std::vector<int> reference;   // never empty
  std::vector<int> hypothesis;  // may be empty (total deletion)
  std::string utterance_id;
  int word_count = 0;  // words in the reference sentence
  Scheme scheme = Scheme::kUnified;
};

// Minimum unit-cost insertions + deletions + substitutions turning a into b.
inline std::size_t edit_distance(const std::vector<int>& a,
                                 const std::vector<int>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Pooled corpus error rate: 100 * sum(distances) / sum(reference lengths).
inline double error_rate(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw UsageError("cannot score an empty pair list");
  std::uint64_t edits = 0, ref_len = 0;
  for (const auto& p : pairs) {
    if (p.reference.empty())
      throw DataError("empty reference for utterance " + p.utterance_id);
    edits += edit_distance(p.reference, p.hypothesis);
    ref_len += p.reference.size();
  }
  return 100.0 * static_cast<double>(edits) / static_cast<double>(ref_len);
}

struct BucketRange {
  int min_words = 0;
  int max_words = 0;  // inclusive
  std::string name;
};

struct BucketSpec {
  std::vector<BucketRange> ranges;

  static BucketSpec standard() {
    return BucketSpec{{{3, 15, "Test1"}, {16, 25, "Test2"}, {26, 60, "Test3"}}};
  }

  void validate() const {
    if (ranges.empty()) throw ConfigError("bucket spec has no ranges");
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (ranges[i].min_words > ranges[i].max_words)
        throw ConfigError("bucket " + ranges[i].name + " has min > max");
      if (i > 0 && ranges[i].min_words <= ranges[i - 1].max_words)
        throw ConfigError("bucket ranges overlap or are out of order at " +
                          ranges[i].name);
    }
  }
};

inline constexpr const char* kOtherBucket = "other";

struct BucketedPairs {
  std::vector<std::string> names;  // spec order, then "other" when non-empty
  std::map<std::string, std::vector<EvalPair>> pairs;
  std::vector<EvalPair> overall;
  std::size_t out_of_range = 0;
};

inline BucketedPairs bucket_by_length(const std::vector<EvalPair>& pairs,
                                      const BucketSpec& spec) {
  spec.validate();
  BucketedPairs out;
  for (const auto& r : spec.ranges) {
    out.names.push_back(r.name);
    out.pairs[r.name];
  }
  for (const auto& p : pairs) {
    out.overall.push_back(p);
    bool placed = false;
    for (const auto& r : spec.ranges) {
      if (p.word_count >= r.min_words && p.word_count <= r.max_words) {
        out.pairs[r.name].push_back(p);
        placed = true;
        break;
      }
    }
    if (!placed) {
      out.pairs[kOtherBucket].push_back(p);
      ++out.out_of_range;
    }
  }
  if (out.out_of_range > 0) out.names.push_back(kOtherBucket);
  return out;
}

// Edit counts pooled over a set of utterances; rates derive from these so an
// Average column can pool rather than average the per-bucket rates.
struct Tally {
  std::uint64_t edits = 0;
  std::uint64_t ref_len = 0;

  void add(const EvalPair& p) {
    if (p.reference.empty())
      throw DataError("empty reference for utterance " + p.utterance_id);
    edits += edit_distance(p.reference, p.hypothesis);
    ref_len += p.reference.size();
  }

  Tally& operator+=(const Tally& o) {
    edits += o.edits;
    ref_len += o.ref_len;
    return *this;
  }

  double rate() const {
    if (ref_len == 0) throw UsageError("tally has no reference tokens");
    return 100.0 * static_cast<double>(edits) / static_cast<double>(ref_len);
  }
};

inline Tally tally_pairs(const std::vector<EvalPair>& pairs) {
  Tally t;
  for (const auto& p : pairs) t.add(p);
  return t;
}

struct ModelRow {
  std::string model;
  std::string metric;  // "PER" or "CER"
  std::map<std::string, Tally> by_bucket;
};

struct Report {
  std::string text;
  std::string csv;
};

inline std::string format_rate(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

// Renders one row per model/metric, one column per bucket plus Average.
// Average pools every utterance of the listed buckets, it is not a mean of
// the bucket rates.
inline Report make_report(const std::vector<ModelRow>& rows,
                          const std::vector<std::string>& bucket_names) {
  if (bucket_names.empty()) throw UsageError("report needs bucket columns");

  std::vector<std::string> columns = bucket_names;
  columns.push_back("Average");

  std::size_t label_width = std::string("model (metric)").size();
  for (const auto& r : rows)
    label_width = std::max(label_width,
                           r.model.size() + r.metric.size() + 3);

  Report report;
  report.csv = "model,bucket,metric,value\n";

  std::string head = "model (metric)";
  head.resize(label_width, ' ');
  for (const auto& c : columns) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "  %8s", c.c_str());
    head += buf;
  }
  report.text = head + "\n";

  for (const auto& r : rows) {
    Tally pooled;
    std::string label = r.model + " (" + r.metric + ")";
    label.resize(label_width, ' ');
    std::string line = label;
    for (const auto& name : bucket_names) {
      auto it = r.by_bucket.find(name);
      std::string cell = "-";
      if (it != r.by_bucket.end() && it->second.ref_len > 0) {
        pooled += it->second;
        cell = format_rate(it->second.rate());
        report.csv += r.model + "," + name + "," + r.metric + "," + cell + "\n";
      }
      char buf[32];
      std::snprintf(buf, sizeof(buf), "  %8s", cell.c_str());
      line += buf;
    }
    std::string avg = pooled.ref_len > 0 ? format_rate(pooled.rate()) : "-";
    if (pooled.ref_len > 0)
      report.csv += r.model + ",Average," + r.metric + "," + avg + "\n";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "  %8s", avg.c_str());
    line += buf;
    report.text += line + "\n";
  }
  report.text +=
      "Average pools all utterances; it is not a mean of bucket rates.\n";
  return report;
}

}  // namespace tinyasr

#endif  // TINYASR_METRICS_HPP_
