// tinyasr/attention.hpp

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

#ifndef TINYASR_ATTENTION_HPP_
#define TINYASR_ATTENTION_HPP_

// Attention-based sequence-to-sequence recognizer: a pyramidal BLSTM listener,
// an additive attender, and an LSTM speller that consumes the previous label's
// embedding next to the attention context.  Trained with teacher forcing,
// decoded greedily or with a left-to-right beam search.
//
// The target alphabet contributes ids 0..V-1.  Id V doubles as the
// start-of-sequence row of the embedding table (input side only) and as the
// end-of-sequence class of the output softmax (output side only); neither ever
// appears inside a decoded hypothesis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tinyasr/common.hpp"
#include "tinyasr/encoder.hpp"
#include "tinyasr/matrix.hpp"
#include "tinyasr/numeric.hpp"
#include "tinyasr/param_store.hpp"
#include "tinyasr/rng.hpp"

namespace tinyasr {

struct LasConfig {
  std::size_t num_targets = 0;   // alphabet size incl. separator
  std::size_t listener_layers = 3;
  std::size_t listener_units = 8;  // per direction
  std::size_t pyramid_step = 2;
  std::size_t speller_layers = 2;
  std::size_t speller_units = 8;
  std::size_t embed_dim = 64;
  std::size_t attn_dim = 64;
  std::size_t beam_width = 16;
  std::size_t max_decode_len = 0;  // 0 derives 2 * encoder frames + 10
  double dropout_rate = 0.5;

  void validate() const {
    if (num_targets < 1) throw ConfigError("attention model needs targets");
    if (listener_layers < 1 || speller_layers < 1)
      throw ConfigError("attention model needs at least one layer per stack");
    if (listener_units < 1 || speller_units < 1)
      throw ConfigError("attention model needs at least one unit per layer");
    if (pyramid_step < 1) throw ConfigError("pyramid step must be >= 1");
    if (embed_dim < 1) throw ConfigError("embedding dim must be >= 1");
    if (attn_dim < 1) throw ConfigError("attention dim must be >= 1");
    if (beam_width < 1) throw ConfigError("beam width must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw ConfigError("dropout must lie in [0, 1)");
  }
};

// Additive attention: score_u = v . tanh(W_q q + W_h h_u + b), weights are
// the softmax over frames, the context is the weighted frame sum.
struct AttenderParams {
  std::string prefix;
  std::size_t query_dim = 0;
  std::size_t enc_dim = 0;
  std::size_t attn_dim = 0;

  void register_params(ParamStore& store) const {
    store.add(prefix + "W_q", attn_dim, query_dim);
    store.add(prefix + "W_h", attn_dim, enc_dim);
    store.add(prefix + "b", attn_dim, 1);
    store.add(prefix + "v", 1, attn_dim);
  }
};

struct AttendCache {
  std::vector<double> query;
  Matrix tanh_pre;  // frames x attn_dim
  std::vector<double> weights;
};

struct AttendResult {
  std::vector<double> weights;  // probability vector over encoder frames
  std::vector<double> context;  // enc_dim
};

inline AttendResult attend(ParamStore& store, const AttenderParams& att,
                           std::span<const double> query, const Matrix& h_enc,
                           AttendCache* cache = nullptr) {
  const std::size_t F = h_enc.rows(), A = att.attn_dim, E = att.enc_dim;
  if (F == 0) throw UsageError("attend: no encoder frames");
  if (query.size() != att.query_dim || h_enc.cols() != E)
    throw UsageError("attend: dimension mismatch");
  const Matrix& W_q = store.value(att.prefix + "W_q");
  const Matrix& W_h = store.value(att.prefix + "W_h");
  const Matrix& b = store.value(att.prefix + "b");
  const Matrix& v = store.value(att.prefix + "v");

  std::vector<double> q_part(A);
  for (std::size_t r = 0; r < A; ++r) q_part[r] = b(r, 0);
  matvec(W_q, query, q_part);

  Matrix tanh_pre(F, A);
  std::vector<double> scores(F), a(A);
  for (std::size_t u = 0; u < F; ++u) {
    a = q_part;
    matvec(W_h, h_enc.row(u), a);
    for (std::size_t r = 0; r < A; ++r) tanh_pre(u, r) = std::tanh(a[r]);
    scores[u] = dot(v.row(0), tanh_pre.row(u));
  }

  AttendResult out;
  out.weights = softmax(scores);
  out.context.assign(E, 0.0);
  for (std::size_t u = 0; u < F; ++u)
    axpy(out.weights[u], h_enc.row(u), out.context);

  if (cache != nullptr) {
    cache->query.assign(query.begin(), query.end());
    cache->tanh_pre = std::move(tanh_pre);
    cache->weights = out.weights;
  }
  return out;
}

// Back-propagates a context gradient; loss reaches the weights only through
// the context.  Accumulates into parameter grads, d_query and d_h_enc.
inline void attend_backward(ParamStore& store, const AttenderParams& att,
                            const Matrix& h_enc, const AttendCache& cache,
                            std::span<const double> d_context,
                            std::vector<double>& d_query, Matrix& d_h_enc) {
  const std::size_t F = h_enc.rows(), A = att.attn_dim, E = att.enc_dim;
  if (d_context.size() != E || !d_h_enc.same_shape(h_enc))
    throw UsageError("attend_backward: shape mismatch");
  const Matrix& W_q = store.value(att.prefix + "W_q");
  const Matrix& W_h = store.value(att.prefix + "W_h");
  const Matrix& v = store.value(att.prefix + "v");
  Matrix& g_W_q = store.grad(att.prefix + "W_q");
  Matrix& g_W_h = store.grad(att.prefix + "W_h");
  Matrix& g_b = store.grad(att.prefix + "b");
  Matrix& g_v = store.grad(att.prefix + "v");

  std::vector<double> d_w(F);
  for (std::size_t u = 0; u < F; ++u) {
    d_w[u] = dot(d_context, h_enc.row(u));
    axpy(cache.weights[u], d_context, d_h_enc.row(u));
  }
  double mixed = 0.0;
  for (std::size_t u = 0; u < F; ++u) mixed += cache.weights[u] * d_w[u];

  if (d_query.size() != att.query_dim)
    throw UsageError("attend_backward: query gradient size mismatch");
  std::vector<double> d_a(A);
  for (std::size_t u = 0; u < F; ++u) {
    double d_score = cache.weights[u] * (d_w[u] - mixed);
    axpy(d_score, cache.tanh_pre.row(u), g_v.row(0));
    for (std::size_t r = 0; r < A; ++r) {
      double t = cache.tanh_pre(u, r);
      d_a[r] = d_score * v(0, r) * (1.0 - t * t);
    }
    add_outer(g_W_q, d_a, cache.query);
    add_outer(g_W_h, d_a, h_enc.row(u));
    for (std::size_t r = 0; r < A; ++r) g_b(r, 0) += d_a[r];
    matvec_t(W_q, d_a, d_query);
    matvec_t(W_h, d_a, d_h_enc.row(u));
  }
}

// Speller recurrent state plus the label consumed at the next step and the
// accumulated hypothesis log-score.
struct DecoderState {
  std::vector<std::vector<double>> h, c;  // per speller layer
  int prev_label = 0;
  double log_score = 0.0;
};

struct Hypothesis {
  std::vector<int> ids;  // never contains the end-of-sequence id
  double log_score = 0.0;
  bool truncated = false;
};

struct SpellStepCache {
  std::vector<LstmStepCache> layers;
  std::vector<double> probs;
  int prev_label = 0;
};

struct LasLossCache {
  Matrix h_enc;
  EncoderCache enc;
  std::vector<AttendCache> att;
  std::vector<SpellStepCache> steps;
  std::vector<int> teacher;  // target with the end-of-sequence id appended
  bool consumed = false;
};

class LasModel {
 public:
  LasModel(const LasConfig& cfg, std::size_t feature_dim,
           std::string prefix = "las.")
      : cfg_(cfg),
        feature_dim_(feature_dim),
        prefix_(std::move(prefix)),
        listener_(listener_config(cfg), feature_dim, prefix_ + "listener.") {
    cfg_.validate();
    if (feature_dim < 1) throw ConfigError("attention model needs features");
    attender_ = AttenderParams{prefix_ + "att.", cfg_.speller_units,
                               listener_.output_dim(), cfg_.attn_dim};
  }

  const LasConfig& config() const { return cfg_; }
  const Encoder& listener() const { return listener_; }
  int sos_id() const { return static_cast<int>(cfg_.num_targets); }
  int eos_id() const { return static_cast<int>(cfg_.num_targets); }
  std::size_t num_outputs() const { return cfg_.num_targets + 1; }

  void register_params(ParamStore& store) {
    listener_.register_params(store);
    attender_.register_params(store);
    store.add(prefix_ + "embed", cfg_.num_targets + 1, cfg_.embed_dim);
    speller_cells_.clear();
    for (std::size_t l = 0; l < cfg_.speller_layers; ++l)
      speller_cells_.push_back(register_lstm_cell(
          store, prefix_ + "spell.l" + std::to_string(l) + ".",
          speller_input_dim(l), cfg_.speller_units));
    store.add(prefix_ + "out.W", num_outputs(), cfg_.speller_units);
    store.add(prefix_ + "out.b", num_outputs(), 1);
  }

  std::size_t speller_input_dim(std::size_t layer) const {
    return layer == 0 ? cfg_.embed_dim + listener_.output_dim()
                      : cfg_.speller_units;
  }

  DecoderState initial_state() const {
    DecoderState state;
    state.h.assign(cfg_.speller_layers,
                   std::vector<double>(cfg_.speller_units, 0.0));
    state.c = state.h;
    state.prev_label = sos_id();
    return state;
  }

  std::size_t effective_max_decode_len(std::size_t enc_frames) const {
    return cfg_.max_decode_len > 0 ? cfg_.max_decode_len
                                   : 2 * enc_frames + 10;
  }

  EncoderCache listen(ParamStore& store, const Matrix& features,
                      bool train_mode, Rng* dropout_rng = nullptr) const {
    return listener_.forward(store, features, train_mode, dropout_rng);
  }

  // Advances the state in place and returns the output distribution over
  // the target set plus the end-of-sequence class.
  std::vector<double> spell_step(ParamStore& store, DecoderState& state,
                                 std::span<const double> context,
                                 SpellStepCache* cache = nullptr) const {
    if (state.h.size() != cfg_.speller_layers ||
        state.c.size() != cfg_.speller_layers)
      throw UsageError("spell_step: state layer count mismatch");
    if (state.prev_label < 0 || state.prev_label > sos_id())
      throw UsageError("spell_step: previous label out of range");
    if (context.size() != listener_.output_dim())
      throw UsageError("spell_step: context dim mismatch");

    const Matrix& embed = store.value(prefix_ + "embed");
    std::vector<double> x(cfg_.embed_dim + context.size());
    for (std::size_t j = 0; j < cfg_.embed_dim; ++j)
      x[j] = embed(static_cast<std::size_t>(state.prev_label), j);
    std::copy(context.begin(), context.end(), x.begin() + cfg_.embed_dim);

    std::vector<LstmStepCache> local(cfg_.speller_layers);
    std::vector<LstmStepCache>& steps = cache != nullptr ? cache->layers : local;
    steps.resize(cfg_.speller_layers);
    const std::vector<double>* input = &x;
    for (std::size_t l = 0; l < cfg_.speller_layers; ++l) {
      LstmCellRef cell = bind_lstm_cell(store, speller_cells_[l]);
      lstm_cell_step(cell, *input, state.h[l], state.c[l], steps[l]);
      state.h[l] = steps[l].h;
      state.c[l] = steps[l].c;
      input = &state.h[l];
    }

    const Matrix& W = store.value(prefix_ + "out.W");
    const Matrix& b = store.value(prefix_ + "out.b");
    std::vector<double> probs(num_outputs());
    for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = b(k, 0);
    matvec(W, state.h.back(), probs);
    softmax_inplace(probs);
    for (double p : probs)
      if (!std::isfinite(p))
        throw NumericError("speller produced a non-finite distribution");

    if (cache != nullptr) {
      cache->probs = probs;
      cache->prev_label = state.prev_label;
    }
    return probs;
  }

  // Teacher-forced negative log likelihood, averaged over the target steps
  // plus the final end-of-sequence step.  Gaussian input noise and listener
  // dropout apply only in train mode.
  double loss(ParamStore& store, const Matrix& features,
              std::span<const int> target, bool train_mode,
              const NoiseConfig& noise = {}, Rng* dropout_rng = nullptr,
              LasLossCache* cache = nullptr) const {
    if (target.empty()) throw UsageError("attention loss needs a target");
    for (int id : target)
      if (id < 0 || id >= static_cast<int>(cfg_.num_targets))
        throw DataError("attention target id " + std::to_string(id) +
                        " outside the alphabet");

    Matrix x = train_mode && noise.sigma > 0.0
                   ? add_gaussian_noise(features, noise)
                   : features;
    LasLossCache local;
    LasLossCache& cc = cache != nullptr ? *cache : local;
    cc.enc = listener_.forward(store, x, train_mode, dropout_rng);
    cc.h_enc = cc.enc.out;
    cc.teacher.assign(target.begin(), target.end());
    cc.teacher.push_back(eos_id());

    const std::size_t steps = cc.teacher.size();
    cc.att.resize(steps);
    cc.steps.resize(steps);
    DecoderState state = initial_state();
    double total = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      AttendResult att =
          attend(store, attender_, state.h.back(), cc.h_enc, &cc.att[i]);
      std::vector<double> probs =
          spell_step(store, state, att.context, &cc.steps[i]);
      total += cross_entropy(probs, static_cast<std::size_t>(cc.teacher[i]));
      state.prev_label = cc.teacher[i];
    }
    return total / static_cast<double>(steps);
  }

  // Accumulates parameter gradients for a previous loss call.  A cache can
  // back-propagate only once.
  void loss_backward(ParamStore& store, LasLossCache& cache) const {
    if (cache.consumed)
      throw UsageError("attention loss cache already consumed");
    cache.consumed = true;
    const std::size_t steps = cache.teacher.size();
    const std::size_t S = cfg_.speller_layers, U = cfg_.speller_units;
    const std::size_t K = num_outputs();
    const double scale = 1.0 / static_cast<double>(steps);

    const Matrix& W = store.value(prefix_ + "out.W");
    Matrix& g_W = store.grad(prefix_ + "out.W");
    Matrix& g_b = store.grad(prefix_ + "out.b");
    Matrix& g_embed = store.grad(prefix_ + "embed");

    Matrix d_h_enc(cache.h_enc.rows(), cache.h_enc.cols());
    std::vector<std::vector<double>> dh_carry(S, std::vector<double>(U, 0.0));
    std::vector<std::vector<double>> dc_carry = dh_carry;
    std::vector<double> dq_carry(U, 0.0);

    std::vector<double> d_logits(K), d_x, d_h_prev, d_c_prev;
    for (std::size_t n = 0; n < steps; ++n) {
      const std::size_t i = steps - 1 - n;
      const SpellStepCache& sc = cache.steps[i];
      const std::vector<double>& h_top = sc.layers.back().h;

      for (std::size_t k = 0; k < K; ++k) d_logits[k] = scale * sc.probs[k];
      d_logits[static_cast<std::size_t>(cache.teacher[i])] -= scale;
      add_outer(g_W, d_logits, h_top);
      for (std::size_t k = 0; k < K; ++k) g_b(k, 0) += d_logits[k];

      std::vector<std::vector<double>> d_h = dh_carry;
      matvec_t(W, d_logits, d_h[S - 1]);
      axpy(1.0, dq_carry, d_h[S - 1]);

      for (std::size_t m = 0; m < S; ++m) {
        const std::size_t l = S - 1 - m;
        LstmCellRef cell = bind_lstm_cell(store, speller_cells_[l]);
        lstm_cell_backward(cell, sc.layers[l], d_h[l], dc_carry[l], d_x,
                           d_h_prev, d_c_prev);
        dh_carry[l] = d_h_prev;
        dc_carry[l] = d_c_prev;
        if (l > 0) {
          axpy(1.0, d_x, d_h[l - 1]);
        } else {
          std::span<const double> d_embed(d_x.data(), cfg_.embed_dim);
          axpy(1.0, d_embed,
               g_embed.row(static_cast<std::size_t>(sc.prev_label)));
          std::span<const double> d_ctx(d_x.data() + cfg_.embed_dim,
                                        listener_.output_dim());
          std::fill(dq_carry.begin(), dq_carry.end(), 0.0);
          attend_backward(store, attender_, cache.h_enc, cache.att[i], d_ctx,
                          dq_carry, d_h_enc);
        }
      }
    }
    listener_.backward(store, cache.enc, d_h_enc);
  }

  Hypothesis greedy_decode(ParamStore& store, const Matrix& features) const {
    EncoderCache enc = listener_.forward(store, features, false);
    const std::size_t max_len = effective_max_decode_len(enc.out.rows());
    DecoderState state = initial_state();
    Hypothesis hyp;
    hyp.truncated = true;
    for (std::size_t step = 0; step < max_len; ++step) {
      AttendResult att = attend(store, attender_, state.h.back(), enc.out);
      std::vector<double> probs = spell_step(store, state, att.context);
      std::size_t best = 0;
      for (std::size_t k = 1; k < probs.size(); ++k)
        if (probs[k] > probs[best]) best = k;
      hyp.log_score += std::log(probs[best]);
      if (static_cast<int>(best) == eos_id()) {
        hyp.truncated = false;
        break;
      }
      hyp.ids.push_back(static_cast<int>(best));
      state.prev_label = static_cast<int>(best);
    }
    return hyp;
  }

  // Left-to-right beam search.  Each step ranks every expansion of every
  // live beam by accumulated log-score.  An expansion emitting
  // end-of-sequence moves to the completed pool when it ranks within the
  // beam width or is its own hypothesis' best next step; it never occupies
  // a beam slot, so the next beam keeps the best beam_width non-terminal
  // expansions.  With no completion by the length cap the best live beam is
  // returned flagged as truncated.
  std::vector<Hypothesis> beam_search(ParamStore& store,
                                      const Matrix& features,
                                      std::size_t beam_width = 0) const {
    const std::size_t width = beam_width > 0 ? beam_width : cfg_.beam_width;
    EncoderCache enc = listener_.forward(store, features, false);
    const std::size_t max_len = effective_max_decode_len(enc.out.rows());

    struct Beam {
      DecoderState state;
      std::vector<int> ids;
      double log_score = 0.0;
    };
    std::vector<Beam> beams(1);
    beams[0].state = initial_state();
    std::vector<Hypothesis> completed;

    struct Cand {
      std::size_t beam = 0;
      int label = 0;
      double score = 0.0;
      bool beam_best = false;  // label is the argmax of its beam's next step
    };
    for (std::size_t step = 0; step < max_len && !beams.empty(); ++step) {
      std::vector<DecoderState> stepped(beams.size());
      std::vector<Cand> cands;
      cands.reserve(beams.size() * num_outputs());
      for (std::size_t bi = 0; bi < beams.size(); ++bi) {
        AttendResult att =
            attend(store, attender_, beams[bi].state.h.back(), enc.out);
        stepped[bi] = beams[bi].state;
        std::vector<double> probs =
            spell_step(store, stepped[bi], att.context);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < probs.size(); ++k)
          if (probs[k] > probs[arg]) arg = k;
        for (std::size_t k = 0; k < probs.size(); ++k)
          cands.push_back({bi, static_cast<int>(k),
                           beams[bi].log_score + std::log(probs[k]),
                           k == arg});
      }
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Cand& a, const Cand& b) {
                         return a.score > b.score;
                       });

      std::vector<Beam> next;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const Cand& cand = cands[i];
        if (cand.label == eos_id()) {
          if (i < width || cand.beam_best)
            completed.push_back(
                Hypothesis{beams[cand.beam].ids, cand.score, false});
        } else if (next.size() < width) {
          Beam b;
          b.state = stepped[cand.beam];
          b.state.prev_label = cand.label;
          b.ids = beams[cand.beam].ids;
          b.ids.push_back(cand.label);
          b.log_score = cand.score;
          next.push_back(std::move(b));
        }
      }
      beams = std::move(next);
    }

    auto better = [](const Hypothesis& a, const Hypothesis& b) {
      if (a.log_score != b.log_score) return a.log_score > b.log_score;
      if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
      return a.ids < b.ids;
    };
    if (completed.empty()) {
      Hypothesis best;
      best.truncated = true;
      best.log_score = kNegInf;
      for (const Beam& b : beams) {
        Hypothesis h{b.ids, b.log_score, true};
        if (better(h, best)) best = std::move(h);
      }
      return {best};
    }
    std::sort(completed.begin(), completed.end(), better);
    return completed;
  }

 private:
  static EncoderConfig listener_config(const LasConfig& cfg) {
    EncoderConfig ec;
    ec.kind = EncoderKind::kPyramidal;
    ec.layers = cfg.listener_layers;
    ec.units = cfg.listener_units;
    ec.pyramid_step = cfg.pyramid_step;
    ec.dropout = cfg.dropout_rate;
    return ec;
  }

  LasConfig cfg_;
  std::size_t feature_dim_;
  std::string prefix_;
  Encoder listener_;
  AttenderParams attender_;
  std::vector<LstmCellParams> speller_cells_;
};

}  // namespace tinyasr

#endif  // TINYASR_ATTENTION_HPP_
