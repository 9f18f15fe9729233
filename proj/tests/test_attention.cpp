// tests/test_attention.cpp

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

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "tinyasr/attention.hpp"
#include "tinyasr/grad_check.hpp"
#include "tinyasr/matrix.hpp"
#include "tinyasr/numeric.hpp"
#include "tinyasr/param_store.hpp"
#include "tinyasr/rng.hpp"

using namespace tinyasr;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                     double scale = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

LasConfig small_cfg(std::size_t num_targets, double dropout = 0.0,
                    std::size_t max_decode_len = 0) {
  LasConfig cfg;
  cfg.num_targets = num_targets;
  cfg.listener_layers = 2;
  cfg.listener_units = 2;
  cfg.pyramid_step = 2;
  cfg.speller_layers = 2;
  cfg.speller_units = 3;
  cfg.embed_dim = 3;
  cfg.attn_dim = 3;
  cfg.beam_width = 16;
  cfg.max_decode_len = max_decode_len;
  cfg.dropout_rate = dropout;
  return cfg;
}

// Small model over 4-dim features; seed 0 leaves every parameter at zero.
struct SmallModel {
  LasConfig cfg;
  LasModel model;
  ParamStore store;

  explicit SmallModel(std::size_t num_targets, std::uint64_t seed,
                      double dropout = 0.0, std::size_t max_decode_len = 0)
      : cfg(small_cfg(num_targets, dropout, max_decode_len)), model(cfg, 4) {
    model.register_params(store);
    if (seed != 0) store.init_uniform_scaled(seed);
  }
};

// A hand-saturated transducer over labels {0, 1}: the speller passes the
// previous label's one-hot embedding through saturated gates, and the output
// weights read it back as the next symbol.  The chain variant emits
// "0 1 eos"; the loop variant emits 0 forever with eos as the runner-up.
struct ChainModel {
  LasConfig cfg;
  LasModel model;
  ParamStore store;

  explicit ChainModel(bool loop_forever, std::size_t max_decode_len = 0)
      : cfg(chain_cfg(max_decode_len)), model(cfg, 3) {
    model.register_params(store);
    Matrix& embed = store.value("las.embed");
    embed(0, 0) = 5.0;
    embed(1, 1) = 5.0;
    embed(2, 2) = 5.0;  // start-of-sequence row
    for (const char* layer : {"l0", "l1"}) {
      std::string p = std::string("las.spell.") + layer + ".";
      for (std::size_t r = 0; r < 3; ++r) {
        store.value(p + "b_i")(r, 0) = 50.0;
        store.value(p + "b_f")(r, 0) = -50.0;
        store.value(p + "b_o")(r, 0) = 50.0;
      }
    }
    Matrix& W0 = store.value("las.spell.l0.W_gx");
    Matrix& W1 = store.value("las.spell.l1.W_gx");
    for (std::size_t j = 0; j < 3; ++j) {
      W0(j, j) = 5.0;   // reads the embedding block of the input
      W1(j, j) = 50.0;  // saturates the same lane again
    }
    Matrix& W = store.value("las.out.W");
    if (loop_forever) {
      for (std::size_t j = 0; j < 3; ++j) {
        W(0, j) = 65.0;  // label 0 dominates from any lane
        W(2, j) = 30.0;  // end-of-sequence stays the runner-up
      }
    } else {
      W(0, 2) = 65.0;  // sos lane -> emit 0
      W(1, 0) = 65.0;  // 0 lane   -> emit 1
      W(2, 1) = 65.0;  // 1 lane   -> emit eos
    }
  }

  static LasConfig chain_cfg(std::size_t max_decode_len) {
    LasConfig cfg;
    cfg.num_targets = 2;
    cfg.listener_layers = 1;
    cfg.listener_units = 2;
    cfg.pyramid_step = 2;
    cfg.speller_layers = 2;
    cfg.speller_units = 3;
    cfg.embed_dim = 3;
    cfg.attn_dim = 2;
    cfg.beam_width = 16;
    cfg.max_decode_len = max_decode_len;
    cfg.dropout_rate = 0.0;
    return cfg;
  }
};

}  // namespace

TEST_CASE("attention weights are a distribution and the context stays in the hull") {
  ParamStore store;
  AttenderParams att{"att.", 3, 5, 4};
  att.register_params(store);
  store.init_uniform_scaled(41);

  Rng rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t frames = 1 + rng.next_u64() % 7;
    Matrix h_enc = random_matrix(frames, 5, rng, 2.0);
    std::vector<double> query(3);
    for (double& q : query) q = rng.uniform(-2.0, 2.0);

    AttendResult out = attend(store, att, query, h_enc);
    REQUIRE(out.weights.size() == frames);
    double sum = 0.0;
    for (double w : out.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t j = 0; j < 5; ++j) {
      double lo = h_enc(0, j), hi = h_enc(0, j);
      for (std::size_t u = 1; u < frames; ++u) {
        lo = std::min(lo, h_enc(u, j));
        hi = std::max(hi, h_enc(u, j));
      }
      CHECK(out.context[j] >= lo - 1e-12);
      CHECK(out.context[j] <= hi + 1e-12);
    }
  }
}

TEST_CASE("equal attention scores average the encoder frames") {
  ParamStore store;
  AttenderParams att{"att.", 3, 4, 2};
  att.register_params(store);  // all zeros, so every score is zero

  Rng rng(43);
  Matrix h_enc = random_matrix(6, 4, rng);
  std::vector<double> query{0.3, -0.1, 0.9};
  AttendResult out = attend(store, att, query, h_enc);

  for (double w : out.weights) CHECK(w == Catch::Approx(1.0 / 6.0).margin(1e-12));
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (std::size_t u = 0; u < 6; ++u) mean += h_enc(u, j);
    mean /= 6.0;
    CHECK(out.context[j] == Catch::Approx(mean).margin(1e-12));
  }
}

TEST_CASE("saturated attention scores select a single frame") {
  ParamStore store;
  AttenderParams att{"att.", 2, 4, 1};
  att.register_params(store);
  store.value("att.W_h")(0, 0) = 40.0;
  store.value("att.v")(0, 0) = 80.0;

  Rng rng(44);
  Matrix h_enc = random_matrix(5, 4, rng);
  for (std::size_t u = 0; u < 5; ++u) h_enc(u, 0) = u == 2 ? 1.0 : -1.0;

  std::vector<double> query{0.5, -0.5};
  AttendResult out = attend(store, att, query, h_enc);
  CHECK(out.weights[2] == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(out.context[j] == Catch::Approx(h_enc(2, j)).margin(1e-12));
}

TEST_CASE("attend rejects empty or mismatched inputs") {
  ParamStore store;
  AttenderParams att{"att.", 2, 3, 2};
  att.register_params(store);

  const std::vector<double> query{0.0, 0.0};
  const Matrix no_frames(0, 3);
  CHECK_THROWS_AS(attend(store, att, query, no_frames), UsageError);

  const Matrix frames(4, 3);
  const std::vector<double> bad_query{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(attend(store, att, bad_query, frames), UsageError);
  const Matrix bad_frames(4, 5);
  CHECK_THROWS_AS(attend(store, att, query, bad_frames), UsageError);
}

TEST_CASE("attender gradients pass a finite-difference check") {
  ParamStore store;
  AttenderParams att{"att.", 3, 4, 3};
  att.register_params(store);
  store.init_uniform_scaled(45);

  Rng rng(46);
  const Matrix h_enc = random_matrix(5, 4, rng);
  std::vector<double> query(3);
  for (double& q : query) q = rng.uniform(-1.0, 1.0);
  const std::vector<double> d_context{1.0, 2.0, 3.0, 4.0};

  auto loss_fn = [&](ParamStore& ps) {
    AttendCache cache;
    AttendResult out = attend(ps, att, query, h_enc, &cache);
    double loss = dot(d_context, out.context);
    std::vector<double> d_query(3, 0.0);
    Matrix d_h_enc(5, 4);
    attend_backward(ps, att, h_enc, cache, d_context, d_query, d_h_enc);
    return loss;
  };
  GradCheckReport report = grad_check(loss_fn, store, 1e-5, 0, 47);
  INFO(report.worst_param << "[" << report.worst_index << "] analytic "
                          << report.worst_analytic << " numeric "
                          << report.worst_numeric);
  CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("spell step is normalized, uniform at zero, and deterministic") {
  SmallModel zero(3, 0);
  DecoderState state = zero.model.initial_state();
  CHECK(state.prev_label == zero.model.sos_id());
  std::vector<double> context(zero.model.listener().output_dim(), 0.0);
  std::vector<double> probs = zero.model.spell_step(zero.store, state, context);
  REQUIRE(probs.size() == 4);
  for (double p : probs) CHECK(p == Catch::Approx(0.25).margin(1e-12));

  SmallModel m(3, 7);
  Rng rng(48);
  for (int trial = 0; trial < 20; ++trial) {
    DecoderState a = m.model.initial_state();
    a.prev_label = static_cast<int>(rng.next_u64() % 4);  // labels or sos
    std::vector<double> ctx(m.model.listener().output_dim());
    for (double& c : ctx) c = rng.uniform(-1.0, 1.0);
    DecoderState b = a;
    std::vector<double> pa = m.model.spell_step(m.store, a, ctx);
    std::vector<double> pb = m.model.spell_step(m.store, b, ctx);
    CHECK(pa == pb);
    CHECK(a.h == b.h);
    CHECK(a.c == b.c);
    double sum = 0.0;
    for (double p : pa) sum += p;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("spell step rejects a poisoned parameter store") {
  SmallModel m(3, 7);
  m.store.value("las.out.W")(0, 0) = std::numeric_limits<double>::infinity();
  DecoderState state = m.model.initial_state();
  const std::vector<double> context(m.model.listener().output_dim(), 0.0);
  CHECK_THROWS_AS(m.model.spell_step(m.store, state, context), NumericError);
}

TEST_CASE("listener frame counts follow the pyramid schedule") {
  SmallModel m(3, 9);
  CHECK(m.model.listener().output_frames(96) == 24);  // two halvings here
  CHECK(m.model.listener().output_frames(8) == 2);

  LasConfig cfg = small_cfg(3);
  cfg.listener_layers = 3;
  LasModel deep(cfg, 4);
  ParamStore store;
  deep.register_params(store);
  store.init_uniform_scaled(10);
  CHECK(deep.listener().output_frames(96) == 12);
  CHECK(deep.listener().output_frames(8) == 1);

  Rng rng(49);
  Matrix feats = random_matrix(8, 4, rng);
  EncoderCache enc = deep.listen(store, feats, false);
  CHECK(enc.out.rows() == 1);

  EncoderCache again = deep.listen(store, feats, false);
  REQUIRE(again.out.same_shape(enc.out));
  for (std::size_t i = 0; i < enc.out.size(); ++i)
    CHECK(again.out.data()[i] == enc.out.data()[i]);
}

TEST_CASE("teacher forcing on an all-zero model scores ln K per step") {
  SmallModel zero(3, 0);
  Rng rng(50);
  Matrix feats = random_matrix(12, 4, rng);
  const std::vector<int> target{0, 2, 1};
  double loss = zero.model.loss(zero.store, feats, target, false);
  CHECK(loss == Catch::Approx(std::log(4.0)).margin(1e-12));

  const std::vector<int> single{1};
  CHECK(zero.model.loss(zero.store, feats, single, false) ==
        Catch::Approx(std::log(4.0)).margin(1e-12));
}

TEST_CASE("a saturated transducer reproduces its script at near-zero loss") {
  ChainModel chain(false);
  Matrix feats(6, 3);
  const std::vector<int> target{0, 1};
  double loss = chain.model.loss(chain.store, feats, target, false);
  CHECK(loss >= 0.0);
  CHECK(loss < 1e-12);

  Hypothesis greedy = chain.model.greedy_decode(chain.store, feats);
  CHECK(greedy.ids == target);
  CHECK_FALSE(greedy.truncated);
  CHECK(std::abs(greedy.log_score) < 1e-12);

  for (std::size_t width : {1u, 4u, 16u}) {
    std::vector<Hypothesis> hyps =
        chain.model.beam_search(chain.store, feats, width);
    REQUIRE_FALSE(hyps.empty());
    CHECK(hyps[0].ids == target);
    CHECK(std::abs(hyps[0].log_score) < 1e-12);
    CHECK_FALSE(hyps[0].truncated);
  }
}

TEST_CASE("loss outside train mode ignores noise and dropout settings") {
  SmallModel m(3, 11, 0.5);
  Rng rng(51);
  Matrix feats = random_matrix(10, 4, rng);
  const std::vector<int> target{2, 0};

  double plain = m.model.loss(m.store, feats, target, false);
  Rng dropout_rng(52);
  double with_knobs = m.model.loss(m.store, feats, target, false,
                                   NoiseConfig{0.6, 99}, &dropout_rng);
  CHECK(plain == with_knobs);
}

TEST_CASE("train-mode noise shifts the loss deterministically") {
  SmallModel m(3, 13);
  Rng rng(53);
  Matrix feats = random_matrix(10, 4, rng);
  const std::vector<int> target{1, 2};

  double eval_loss = m.model.loss(m.store, feats, target, false);
  double a = m.model.loss(m.store, feats, target, true, NoiseConfig{0.6, 5});
  double b = m.model.loss(m.store, feats, target, true, NoiseConfig{0.6, 5});
  CHECK(a == b);
  CHECK(a != eval_loss);
}

TEST_CASE("loss validates its target sequence") {
  SmallModel m(3, 15);
  Rng rng(54);
  Matrix feats = random_matrix(8, 4, rng);

  const std::vector<int> empty;
  CHECK_THROWS_AS(m.model.loss(m.store, feats, empty, false), UsageError);
  const std::vector<int> too_big{0, 3};
  CHECK_THROWS_AS(m.model.loss(m.store, feats, too_big, false), DataError);
  const std::vector<int> negative{-1};
  CHECK_THROWS_AS(m.model.loss(m.store, feats, negative, false), DataError);
}

namespace {

// The default init leaves some attention-path gradients near 1e-8, below the
// central-difference noise floor; scaling the weights up keeps every sampled
// gradient well above it.
void amplify_params(ParamStore& store) {
  for (auto& [name, e] : store.entries()) {
    double s = name.starts_with("las.att.")        ? 6.0
               : name.starts_with("las.listener.") ? 3.0
                                                   : 2.0;
    for (std::size_t i = 0; i < e.value.size(); ++i) e.value.data()[i] *= s;
  }
}

}  // namespace

TEST_CASE("full attention gradient passes a finite-difference check") {
  SmallModel m(3, 21);
  amplify_params(m.store);
  Rng rng(55);
  const Matrix feats = random_matrix(12, 4, rng);
  const std::vector<int> target{0, 2, 1};

  auto loss_fn = [&](ParamStore& ps) {
    LasLossCache cache;
    double loss = m.model.loss(ps, feats, target, false, {}, nullptr, &cache);
    m.model.loss_backward(ps, cache);
    return loss;
  };
  GradCheckReport report = grad_check(loss_fn, m.store, 1e-5, 0, 77);
  INFO(report.worst_param << "[" << report.worst_index << "] analytic "
                          << report.worst_analytic << " numeric "
                          << report.worst_numeric);
  CHECK(report.checked == m.store.scalar_count());
  CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("train-mode gradient survives noise and dropout") {
  SmallModel m(3, 31, 0.4);
  amplify_params(m.store);
  Rng rng(56);
  const Matrix feats = random_matrix(12, 4, rng);
  const std::vector<int> target{1, 0};

  auto loss_fn = [&](ParamStore& ps) {
    Rng dropout_rng(11);
    LasLossCache cache;
    double loss = m.model.loss(ps, feats, target, true, NoiseConfig{0.3, 17},
                               &dropout_rng, &cache);
    m.model.loss_backward(ps, cache);
    return loss;
  };
  GradCheckReport report = grad_check(loss_fn, m.store, 1e-5, 140, 78);
  INFO(report.worst_param << "[" << report.worst_index << "] analytic "
                          << report.worst_analytic << " numeric "
                          << report.worst_numeric);
  CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("a loss cache back-propagates only once") {
  SmallModel m(3, 33);
  Rng rng(57);
  Matrix feats = random_matrix(8, 4, rng);
  const std::vector<int> target{2};

  LasLossCache cache;
  m.model.loss(m.store, feats, target, false, {}, nullptr, &cache);
  m.model.loss_backward(m.store, cache);
  CHECK_THROWS_AS(m.model.loss_backward(m.store, cache), UsageError);
}

TEST_CASE("beam width one reproduces the greedy path") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    SmallModel m(3, 1000 + s);
    Rng rng(500 + s);
    Matrix feats = random_matrix(4 + s % 8, 4, rng);

    Hypothesis greedy = m.model.greedy_decode(m.store, feats);
    std::vector<Hypothesis> beam = m.model.beam_search(m.store, feats, 1);
    REQUIRE_FALSE(beam.empty());
    INFO("model seed " << 1000 + s);
    CHECK(beam[0].ids == greedy.ids);
    CHECK(beam[0].log_score == greedy.log_score);
    CHECK(beam[0].truncated == greedy.truncated);
  }
}

TEST_CASE("wider beams never lower the top completed score") {
  const std::vector<std::size_t> widths{1, 2, 4, 8, 16};
  int fully_completed = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SmallModel m(3, 2000 + s);
    Rng rng(3000 + s);
    Matrix feats = random_matrix(4 + s % 9, 4, rng);

    double prev_score = kNegInf;
    bool all_done = true;
    for (std::size_t w : widths) {
      std::vector<Hypothesis> hyps = m.model.beam_search(m.store, feats, w);
      REQUIRE_FALSE(hyps.empty());
      for (const Hypothesis& h : hyps) {
        for (int id : h.ids) {
          CHECK(id >= 0);
          CHECK(id < 3);  // never the end-of-sequence id
        }
      }
      if (hyps[0].truncated) {
        all_done = false;
        continue;
      }
      INFO("model seed " << 2000 + s << " width " << w);
      CHECK(hyps[0].log_score >= prev_score - 1e-12);
      prev_score = hyps[0].log_score;
    }
    if (all_done) ++fully_completed;
  }
  CHECK(fully_completed >= 10);
}

TEST_CASE("a uniform model exposes the completed-pool ordering") {
  SmallModel m(2, 0, 0.0, 2);  // zero parameters, decode cap 2
  Rng rng(60);
  Matrix feats = random_matrix(8, 4, rng);

  std::vector<Hypothesis> hyps = m.model.beam_search(m.store, feats, 8);
  REQUIRE(hyps.size() == 3);
  const double ln3 = std::log(3.0);
  CHECK(hyps[0].ids.empty());
  CHECK(hyps[0].log_score == Catch::Approx(-ln3).margin(1e-12));
  CHECK(hyps[1].ids == std::vector<int>{0});
  CHECK(hyps[1].log_score == Catch::Approx(-2.0 * ln3).margin(1e-12));
  CHECK(hyps[2].ids == std::vector<int>{1});
  CHECK(hyps[2].log_score == Catch::Approx(-2.0 * ln3).margin(1e-12));
}

TEST_CASE("tied completed scores fall back to the shorter hypothesis") {
  ChainModel loop(true, 3);
  Matrix feats(6, 3);

  std::vector<Hypothesis> one = loop.model.beam_search(loop.store, feats, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].truncated);
  CHECK(one[0].ids == std::vector<int>{0, 0, 0});
  CHECK(std::abs(one[0].log_score) < 1e-9);

  std::vector<Hypothesis> two = loop.model.beam_search(loop.store, feats, 2);
  REQUIRE(two.size() == 3);
  CHECK_FALSE(two[0].truncated);
  CHECK(two[0].ids.empty());
  CHECK(two[1].ids == std::vector<int>{0});
  CHECK(two[2].ids == std::vector<int>{0, 0});
  CHECK(std::abs(two[0].log_score - two[1].log_score) < 1e-9);
  CHECK(std::abs(two[1].log_score - two[2].log_score) < 1e-9);
  CHECK(two[0].log_score < -20.0);
}
