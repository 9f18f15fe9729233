// tinyasr/numeric.hpp

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

#ifndef TINYASR_NUMERIC_HPP_
#define TINYASR_NUMERIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tinyasr/common.hpp"
#include "tinyasr/matrix.hpp"
#include "tinyasr/rng.hpp"

namespace tinyasr {

// log(exp(a) + exp(b)) with -inf treated as log(0).
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log sum_i exp(values[i]), max-shifted.  Entries may be -inf; the result is
// -inf iff all entries are.  Empty input is a usage error.
inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw UsageError("log_sum_exp: empty input");
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

// Numerically stable softmax.  Invariant to adding a constant to all logits.
inline void softmax_inplace(std::span<double> logits) {
  if (logits.empty()) throw UsageError("softmax: empty input");
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  softmax_inplace(out);
  return out;
}

// out[i] = logits[i] - log sum_j exp(logits[j]).
inline void log_softmax(std::span<const double> logits, std::span<double> out) {
  if (logits.size() != out.size())
    throw UsageError("log_softmax: length mismatch");
  double lse = log_sum_exp(logits);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

// -log dist[target].  Returns +inf when dist[target] == 0 (degenerate case);
// callers treat the infinite loss as the flag.
inline double cross_entropy(std::span<const double> dist, std::size_t target) {
  if (target >= dist.size()) throw UsageError("cross_entropy: target out of range");
  double p = dist[target];
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p);
}

struct NoiseConfig {
  double sigma = 0.0;      // standard deviation, feature units
  std::uint64_t seed = 0;

  void validate() const {
    if (sigma < 0.0) throw UsageError("NoiseConfig: sigma must be >= 0");
  }
};

// features + i.i.d. N(0, sigma^2) per cell, generated from cfg.seed.
inline Matrix add_gaussian_noise(const Matrix& features, const NoiseConfig& cfg) {
  cfg.validate();
  Matrix out = features;
  if (cfg.sigma == 0.0) return out;
  Rng rng(cfg.seed);
  double* p = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) p[i] += cfg.sigma * rng.gaussian();
  return out;
}

}  // namespace tinyasr

#endif  // TINYASR_NUMERIC_HPP_
