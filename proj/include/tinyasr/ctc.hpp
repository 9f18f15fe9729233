// tinyasr/ctc.hpp

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

#ifndef TINYASR_CTC_HPP_
#define TINYASR_CTC_HPP_

// CTC cost: exact alignment-sum via log-space forward-backward over the
// blank-interleaved lattice, analytic gradients wrt pre-softmax logits, a
// brute-force enumeration oracle, and best-path decoding.
//
// Convention: the blank is the last column of the T x (V+1) score matrix.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "tinyasr/common.hpp"
#include "tinyasr/matrix.hpp"
#include "tinyasr/numeric.hpp"

namespace tinyasr {

// Target needs more frames than the input provides.  Distinct from numeric
// failure so training can skip such utterances instead of aborting.
class CtcInfeasibleError : public DataError {
 public:
  using DataError::DataError;
};

// Merge consecutive repeats, then remove blanks.  May return empty.
inline std::vector<int> collapse_alignment(std::span<const int> alignment,
                                           int blank_id) {
  std::vector<int> out;
  int prev = blank_id;
  for (int id : alignment) {
    if (id != prev && id != blank_id) out.push_back(id);
    prev = id;
  }
  return out;
}

namespace detail {

inline void check_log_prob_rows(const Matrix& log_probs) {
  if (log_probs.rows() == 0 || log_probs.cols() < 2)
    throw UsageError("ctc needs a T x (V+1) score matrix with V >= 1");
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    double z = log_sum_exp(log_probs.row(t));
    if (std::abs(z) > 1e-9)
      throw UsageError("ctc score row " + std::to_string(t) +
                       " is not normalized (log-sum " + std::to_string(z) +
                       ")");
  }
}

inline std::uint64_t fingerprint(const Matrix& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto eat = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  eat(m.rows());
  eat(m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    double d = m.data()[i];
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    eat(bits);
  }
  return h;
}

}  // namespace detail

struct CtcLattice {
  std::vector<int> expanded;  // blank-interleaved target, length 2U+1
  Matrix alpha;               // (2U+1) x T, log domain
  Matrix beta;                // (2U+1) x T, log domain, excludes emission at t
  double log_prob = kNegInf;  // log P(target | input) == -loss
  std::uint64_t input_fingerprint = 0;
};

struct CtcResult {
  double loss = 0.0;
  CtcLattice lattice;
};

// Exact -log P(target | input) by forward-backward over the expanded
// lattice.  log_probs rows must be normalized log distributions.
inline CtcResult ctc_loss(const Matrix& log_probs,
                          const std::vector<int>& target) {
  detail::check_log_prob_rows(log_probs);
  const std::size_t T = log_probs.rows();
  const int blank = static_cast<int>(log_probs.cols()) - 1;
  if (target.empty()) throw UsageError("ctc target is empty");
  std::size_t repeats = 0;
  for (std::size_t u = 0; u < target.size(); ++u) {
    if (target[u] < 0 || target[u] >= blank)
      throw UsageError("ctc target id out of range: " +
                       std::to_string(target[u]));
    if (u > 0 && target[u] == target[u - 1]) ++repeats;
  }
  if (T < target.size() + repeats)
    throw CtcInfeasibleError(
        "target needs " + std::to_string(target.size() + repeats) +
        " frames but input has " + std::to_string(T));

  const std::size_t U = target.size();
  const std::size_t S = 2 * U + 1;
  CtcLattice lat;
  lat.expanded.resize(S);
  for (std::size_t s = 0; s < S; ++s)
    lat.expanded[s] = (s % 2 == 0) ? blank : target[s / 2];

  auto emit = [&](std::size_t t, std::size_t s) {
    return log_probs(t, static_cast<std::size_t>(lat.expanded[s]));
  };
  // a diagonal skip over s-2 is legal when it does not jump over a blank or
  // merge a repeated label
  auto can_skip = [&](std::size_t s) {
    return s >= 2 && lat.expanded[s] != blank &&
           lat.expanded[s] != lat.expanded[s - 2];
  };

  lat.alpha = Matrix(S, T, kNegInf);
  lat.alpha(0, 0) = emit(0, 0);
  if (S > 1) lat.alpha(1, 0) = emit(0, 1);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      double best = lat.alpha(s, t - 1);
      if (s >= 1) best = log_add(best, lat.alpha(s - 1, t - 1));
      if (can_skip(s)) best = log_add(best, lat.alpha(s - 2, t - 1));
      if (best != kNegInf) lat.alpha(s, t) = best + emit(t, s);
    }

  double log_p = lat.alpha(S - 1, T - 1);
  if (S > 1) log_p = log_add(log_p, lat.alpha(S - 2, T - 1));
  if (std::isnan(log_p) || log_p > 1e-9)
    throw NumericError("ctc forward produced an invalid probability");
  lat.log_prob = log_p;

  // beta excludes the emission at t, so alpha + beta sums paths exactly once
  lat.beta = Matrix(S, T, kNegInf);
  lat.beta(S - 1, T - 1) = 0.0;
  if (S > 1) lat.beta(S - 2, T - 1) = 0.0;
  for (std::size_t n = 1; n < T; ++n) {
    std::size_t t = T - 1 - n;
    for (std::size_t s = 0; s < S; ++s) {
      double acc = lat.beta(s, t + 1) + emit(t + 1, s);
      if (s + 1 < S) acc = log_add(acc, lat.beta(s + 1, t + 1) + emit(t + 1, s + 1));
      if (s + 2 < S && can_skip(s + 2))
        acc = log_add(acc, lat.beta(s + 2, t + 1) + emit(t + 1, s + 2));
      lat.beta(s, t) = acc;
    }
  }

  lat.input_fingerprint = detail::fingerprint(log_probs);
  CtcResult result;
  result.loss = -log_p;
  result.lattice = std::move(lat);
  return result;
}

// Per-frame label posteriors q_t(k) = P(label k emitted at t | target).
// Rows sum to one for feasible instances with finite loss.
inline Matrix ctc_posteriors(const CtcLattice& lattice, std::size_t T,
                             std::size_t num_classes) {
  if (lattice.alpha.cols() != T)
    throw UsageError("lattice does not match the given frame count");
  if (!std::isfinite(lattice.log_prob))
    throw NumericError("ctc posteriors need a finite log probability");
  Matrix q(T, num_classes);
  const std::size_t S = lattice.expanded.size();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      double lp = lattice.alpha(s, t) + lattice.beta(s, t) - lattice.log_prob;
      if (lp != kNegInf)
        q(t, static_cast<std::size_t>(lattice.expanded[s])) += std::exp(lp);
    }
  return q;
}

// Gradient of the loss wrt pre-softmax logits: softmax(logits) - posteriors.
// The lattice must come from a ctc_loss call on these same log_probs.
inline Matrix ctc_gradient(const CtcLattice& lattice, const Matrix& log_probs) {
  if (lattice.input_fingerprint != detail::fingerprint(log_probs))
    throw UsageError("ctc lattice does not belong to these scores");
  Matrix grad = ctc_posteriors(lattice, log_probs.rows(), log_probs.cols());
  for (std::size_t t = 0; t < log_probs.rows(); ++t)
    for (std::size_t k = 0; k < log_probs.cols(); ++k)
      grad(t, k) = std::exp(log_probs(t, k)) - grad(t, k);
  return grad;
}

// Literal enumeration of every length-T alignment; the oracle for ctc_loss.
// Returns +inf when no alignment collapses to the target.
inline double ctc_loss_bruteforce(const Matrix& log_probs,
                                  const std::vector<int>& target) {
  detail::check_log_prob_rows(log_probs);
  const std::size_t T = log_probs.rows();
  const std::size_t K = log_probs.cols();
  const int blank = static_cast<int>(K) - 1;
  double total_paths = std::pow(static_cast<double>(K),
                                static_cast<double>(T));
  if (total_paths > 1e6)
    throw UsageError("brute-force ctc instance too large");

  std::vector<int> alignment(T, 0);
  double acc = kNegInf;
  while (true) {
    double lp = 0.0;
    for (std::size_t t = 0; t < T; ++t)
      lp += log_probs(t, static_cast<std::size_t>(alignment[t]));
    if (collapse_alignment(alignment, blank) == target)
      acc = log_add(acc, lp);

    std::size_t pos = 0;
    while (pos < T && alignment[pos] == static_cast<int>(K) - 1) {
      alignment[pos] = 0;
      ++pos;
    }
    if (pos == T) break;
    ++alignment[pos];
  }
  return -acc;
}

struct CtcHypothesis {
  std::vector<int> ids;  // collapsed; may be empty
  double score = 0.0;    // sum of the chosen per-frame log-probs
};

// Best-path decoding: per-frame argmax, then collapse.
inline CtcHypothesis ctc_greedy_decode(const Matrix& log_probs) {
  detail::check_log_prob_rows(log_probs);
  const int blank = static_cast<int>(log_probs.cols()) - 1;
  std::vector<int> alignment(log_probs.rows());
  CtcHypothesis hyp;
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < log_probs.cols(); ++k)
      if (log_probs(t, k) > log_probs(t, best)) best = k;
    alignment[t] = static_cast<int>(best);
    hyp.score += log_probs(t, best);
  }
  hyp.ids = collapse_alignment(alignment, blank);
  return hyp;
}

}  // namespace tinyasr

#endif  // TINYASR_CTC_HPP_
