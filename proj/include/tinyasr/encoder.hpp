// tinyasr/encoder.hpp

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

#ifndef TINYASR_ENCODER_HPP_
#define TINYASR_ENCODER_HPP_

// Recurrent acoustic encoders.  LSTM cell and bidirectional layers with
// hand-written backpropagation through time, plus two stacks: a flat DBLSTM
// at full frame rate and a pyramidal one that concatenates frame pairs before
// every layer to shrink the time axis.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tinyasr/common.hpp"
#include "tinyasr/matrix.hpp"
#include "tinyasr/param_store.hpp"
#include "tinyasr/rng.hpp"

namespace tinyasr {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Parameter names for one cell under a prefix: four input weights H x D,
// four recurrent weights H x H, four biases H x 1, for the input/forget/
// output gates and the candidate.
struct LstmCellParams {
  std::string prefix;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

inline LstmCellParams register_lstm_cell(ParamStore& store,
                                         const std::string& prefix,
                                         std::size_t input_dim,
                                         std::size_t hidden_dim) {
  for (const char* gate : {"i", "f", "o", "g"}) {
    store.add(prefix + "W_" + gate + "x", hidden_dim, input_dim);
    store.add(prefix + "W_" + gate + "h", hidden_dim, hidden_dim);
    store.add(prefix + "b_" + gate, hidden_dim, 1);
  }
  return LstmCellParams{prefix, input_dim, hidden_dim};
}

// Borrowed views of one cell's tensors; valid while the store lives and no
// tensors are added (ParamStore never reallocates existing entries).
struct LstmCellRef {
  const Matrix *W_ix, *W_ih, *W_fx, *W_fh, *W_ox, *W_oh, *W_gx, *W_gh;
  const Matrix *b_i, *b_f, *b_o, *b_g;
  Matrix *g_W_ix, *g_W_ih, *g_W_fx, *g_W_fh, *g_W_ox, *g_W_oh, *g_W_gx,
      *g_W_gh;
  Matrix *g_b_i, *g_b_f, *g_b_o, *g_b_g;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

inline LstmCellRef bind_lstm_cell(ParamStore& store,
                                  const LstmCellParams& params) {
  LstmCellRef ref;
  ref.input_dim = params.input_dim;
  ref.hidden_dim = params.hidden_dim;
  const std::string& p = params.prefix;
  ref.W_ix = &store.value(p + "W_ix");
  ref.W_ih = &store.value(p + "W_ih");
  ref.W_fx = &store.value(p + "W_fx");
  ref.W_fh = &store.value(p + "W_fh");
  ref.W_ox = &store.value(p + "W_ox");
  ref.W_oh = &store.value(p + "W_oh");
  ref.W_gx = &store.value(p + "W_gx");
  ref.W_gh = &store.value(p + "W_gh");
  ref.b_i = &store.value(p + "b_i");
  ref.b_f = &store.value(p + "b_f");
  ref.b_o = &store.value(p + "b_o");
  ref.b_g = &store.value(p + "b_g");
  ref.g_W_ix = &store.grad(p + "W_ix");
  ref.g_W_ih = &store.grad(p + "W_ih");
  ref.g_W_fx = &store.grad(p + "W_fx");
  ref.g_W_fh = &store.grad(p + "W_fh");
  ref.g_W_ox = &store.grad(p + "W_ox");
  ref.g_W_oh = &store.grad(p + "W_oh");
  ref.g_W_gx = &store.grad(p + "W_gx");
  ref.g_W_gh = &store.grad(p + "W_gh");
  ref.g_b_i = &store.grad(p + "b_i");
  ref.g_b_f = &store.grad(p + "b_f");
  ref.g_b_o = &store.grad(p + "b_o");
  ref.g_b_g = &store.grad(p + "b_g");
  return ref;
}

// Per-step cache: inputs, previous state and gate activations, everything
// the backward pass needs.
struct LstmStepCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, o, g;  // post-nonlinearity gate values
  std::vector<double> c, tanh_c, h;
};

inline void lstm_cell_step(const LstmCellRef& ref, std::span<const double> x_t,
                           std::span<const double> h_prev,
                           std::span<const double> c_prev,
                           LstmStepCache& cache) {
  const std::size_t D = ref.input_dim, H = ref.hidden_dim;
  if (x_t.size() != D || h_prev.size() != H || c_prev.size() != H)
    throw UsageError("lstm_cell_step dimension mismatch");

  cache.x.assign(x_t.begin(), x_t.end());
  cache.h_prev.assign(h_prev.begin(), h_prev.end());
  cache.c_prev.assign(c_prev.begin(), c_prev.end());

  auto preact = [&](const Matrix& Wx, const Matrix& Wh, const Matrix& b,
                    std::vector<double>& out) {
    out.assign(H, 0.0);
    for (std::size_t r = 0; r < H; ++r) out[r] = b(r, 0);
    matvec(Wx, x_t, out);
    matvec(Wh, h_prev, out);
  };

  preact(*ref.W_ix, *ref.W_ih, *ref.b_i, cache.i);
  preact(*ref.W_fx, *ref.W_fh, *ref.b_f, cache.f);
  preact(*ref.W_ox, *ref.W_oh, *ref.b_o, cache.o);
  preact(*ref.W_gx, *ref.W_gh, *ref.b_g, cache.g);

  cache.c.resize(H);
  cache.tanh_c.resize(H);
  cache.h.resize(H);
  for (std::size_t r = 0; r < H; ++r) {
    cache.i[r] = sigmoid(cache.i[r]);
    cache.f[r] = sigmoid(cache.f[r]);
    cache.o[r] = sigmoid(cache.o[r]);
    cache.g[r] = std::tanh(cache.g[r]);
    cache.c[r] = cache.f[r] * c_prev[r] + cache.i[r] * cache.g[r];
    cache.tanh_c[r] = std::tanh(cache.c[r]);
    cache.h[r] = cache.o[r] * cache.tanh_c[r];
  }
}

// Accumulates parameter gradients and returns gradients for the step inputs.
// d_h is the loss gradient wrt h_t, d_c_in the one wrt c_t arriving from the
// following step.
inline void lstm_cell_backward(const LstmCellRef& ref,
                               const LstmStepCache& cache,
                               std::span<const double> d_h,
                               std::span<const double> d_c_in,
                               std::vector<double>& d_x,
                               std::vector<double>& d_h_prev,
                               std::vector<double>& d_c_prev) {
  const std::size_t D = ref.input_dim, H = ref.hidden_dim;
  if (d_h.size() != H || d_c_in.size() != H)
    throw UsageError("lstm_cell_backward dimension mismatch");

  std::vector<double> da_i(H), da_f(H), da_o(H), da_g(H);
  d_c_prev.assign(H, 0.0);
  for (std::size_t r = 0; r < H; ++r) {
    double d_o = d_h[r] * cache.tanh_c[r];
    double d_c = d_c_in[r] +
                 d_h[r] * cache.o[r] * (1.0 - cache.tanh_c[r] * cache.tanh_c[r]);
    double d_i = d_c * cache.g[r];
    double d_g = d_c * cache.i[r];
    double d_f = d_c * cache.c_prev[r];
    d_c_prev[r] = d_c * cache.f[r];
    da_i[r] = d_i * cache.i[r] * (1.0 - cache.i[r]);
    da_f[r] = d_f * cache.f[r] * (1.0 - cache.f[r]);
    da_o[r] = d_o * cache.o[r] * (1.0 - cache.o[r]);
    da_g[r] = d_g * (1.0 - cache.g[r] * cache.g[r]);
  }

  d_x.assign(D, 0.0);
  d_h_prev.assign(H, 0.0);
  auto spread = [&](const std::vector<double>& da, const Matrix& Wx,
                    const Matrix& Wh, Matrix& gWx, Matrix& gWh, Matrix& gb) {
    add_outer(gWx, da, cache.x);
    add_outer(gWh, da, cache.h_prev);
    for (std::size_t r = 0; r < H; ++r) gb(r, 0) += da[r];
    matvec_t(Wx, da, d_x);
    matvec_t(Wh, da, d_h_prev);
  };
  spread(da_i, *ref.W_ix, *ref.W_ih, *ref.g_W_ix, *ref.g_W_ih, *ref.g_b_i);
  spread(da_f, *ref.W_fx, *ref.W_fh, *ref.g_W_fx, *ref.g_W_fh, *ref.g_b_f);
  spread(da_o, *ref.W_ox, *ref.W_oh, *ref.g_W_ox, *ref.g_W_oh, *ref.g_b_o);
  spread(da_g, *ref.W_gx, *ref.W_gh, *ref.g_W_gx, *ref.g_W_gh, *ref.g_b_g);
}

// One unidirectional run over a T x D input.  reverse=true processes frames
// right to left (the h row for frame t still sits at row t).
struct LstmSequence {
  Matrix h;  // T x H
  std::vector<LstmStepCache> steps;
  bool reverse = false;
};

inline LstmSequence lstm_run(const LstmCellRef& ref, const Matrix& inputs,
                             bool reverse) {
  const std::size_t T = inputs.rows(), H = ref.hidden_dim;
  if (T == 0) throw UsageError("lstm_run on an empty sequence");
  if (inputs.cols() != ref.input_dim)
    throw UsageError("lstm_run input dim mismatch");

  LstmSequence seq;
  seq.reverse = reverse;
  seq.h = Matrix(T, H);
  seq.steps.resize(T);

  std::vector<double> h_prev(H, 0.0), c_prev(H, 0.0);
  for (std::size_t n = 0; n < T; ++n) {
    std::size_t t = reverse ? T - 1 - n : n;
    lstm_cell_step(ref, inputs.row(t), h_prev, c_prev, seq.steps[t]);
    h_prev = seq.steps[t].h;
    c_prev = seq.steps[t].c;
    for (std::size_t r = 0; r < H; ++r) seq.h(t, r) = seq.steps[t].h[r];
  }
  return seq;
}

// BPTT over a full run; accumulates parameter gradients and adds input
// gradients into d_inputs (same shape as the forward inputs).
inline void lstm_run_backward(const LstmCellRef& ref, const LstmSequence& seq,
                              const Matrix& d_h_seq, Matrix& d_inputs) {
  const std::size_t T = seq.h.rows(), H = ref.hidden_dim;
  if (d_h_seq.rows() != T || d_h_seq.cols() != H)
    throw UsageError("lstm_run_backward gradient shape mismatch");
  if (d_inputs.rows() != T || d_inputs.cols() != ref.input_dim)
    throw UsageError("lstm_run_backward input gradient shape mismatch");

  std::vector<double> dh_carry(H, 0.0), dc_carry(H, 0.0);
  std::vector<double> d_h(H), d_x, d_h_prev, d_c_prev;
  for (std::size_t n = 0; n < T; ++n) {
    // reverse of the forward iteration order
    std::size_t t = seq.reverse ? n : T - 1 - n;
    for (std::size_t r = 0; r < H; ++r) d_h[r] = d_h_seq(t, r) + dh_carry[r];
    lstm_cell_backward(ref, seq.steps[t], d_h, dc_carry, d_x, d_h_prev,
                       d_c_prev);
    for (std::size_t c = 0; c < ref.input_dim; ++c) d_inputs(t, c) += d_x[c];
    dh_carry = d_h_prev;
    dc_carry = d_c_prev;
  }
}

struct BlstmLayerParams {
  LstmCellParams forward_cell;
  LstmCellParams backward_cell;
};

inline BlstmLayerParams register_blstm_layer(ParamStore& store,
                                             const std::string& prefix,
                                             std::size_t input_dim,
                                             std::size_t hidden_dim) {
  BlstmLayerParams layer;
  layer.forward_cell =
      register_lstm_cell(store, prefix + "fwd.", input_dim, hidden_dim);
  layer.backward_cell =
      register_lstm_cell(store, prefix + "bwd.", input_dim, hidden_dim);
  return layer;
}

// Output is the per-frame concatenation [h_forward ; h_backward], T x 2H.
struct BlstmLayerCache {
  Matrix out;
  LstmSequence fwd, bwd;
};

inline BlstmLayerCache blstm_layer_forward(ParamStore& store,
                                           const BlstmLayerParams& params,
                                           const Matrix& inputs) {
  LstmCellRef fwd = bind_lstm_cell(store, params.forward_cell);
  LstmCellRef bwd = bind_lstm_cell(store, params.backward_cell);
  if (fwd.hidden_dim != bwd.hidden_dim || fwd.input_dim != bwd.input_dim)
    throw UsageError("blstm cells disagree on dimensions");

  BlstmLayerCache cache;
  cache.fwd = lstm_run(fwd, inputs, false);
  cache.bwd = lstm_run(bwd, inputs, true);
  const std::size_t T = inputs.rows(), H = fwd.hidden_dim;
  cache.out = Matrix(T, 2 * H);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t r = 0; r < H; ++r) {
      cache.out(t, r) = cache.fwd.h(t, r);
      cache.out(t, H + r) = cache.bwd.h(t, r);
    }
  return cache;
}

inline void blstm_layer_backward(ParamStore& store,
                                 const BlstmLayerParams& params,
                                 const BlstmLayerCache& cache,
                                 const Matrix& d_out, Matrix& d_inputs) {
  LstmCellRef fwd = bind_lstm_cell(store, params.forward_cell);
  LstmCellRef bwd = bind_lstm_cell(store, params.backward_cell);
  const std::size_t T = cache.out.rows(), H = fwd.hidden_dim;
  if (d_out.rows() != T || d_out.cols() != 2 * H)
    throw UsageError("blstm_layer_backward gradient shape mismatch");

  Matrix d_fwd(T, H), d_bwd(T, H);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t r = 0; r < H; ++r) {
      d_fwd(t, r) = d_out(t, r);
      d_bwd(t, r) = d_out(t, H + r);
    }
  lstm_run_backward(fwd, cache.fwd, d_fwd, d_inputs);
  lstm_run_backward(bwd, cache.bwd, d_bwd, d_inputs);
}

// Concatenates groups of `step` consecutive frames along the feature axis.
// A final partial group is zero-padded to full width.
inline Matrix pyramid_subsample(const Matrix& inputs, std::size_t step) {
  if (step == 0) throw UsageError("pyramid step must be positive");
  if (step == 1) return inputs;
  const std::size_t T = inputs.rows(), D = inputs.cols();
  const std::size_t T_out = (T + step - 1) / step;
  Matrix out(T_out, step * D);
  for (std::size_t t = 0; t < T_out; ++t)
    for (std::size_t k = 0; k < step; ++k) {
      std::size_t src = t * step + k;
      if (src >= T) break;
      for (std::size_t c = 0; c < D; ++c)
        out(t, k * D + c) = inputs(src, c);
    }
  return out;
}

inline void pyramid_subsample_backward(const Matrix& d_out, std::size_t step,
                                       Matrix& d_inputs) {
  if (step == 1) {
    for (std::size_t i = 0; i < d_out.size(); ++i)
      d_inputs.data()[i] += d_out.data()[i];
    return;
  }
  const std::size_t T = d_inputs.rows(), D = d_inputs.cols();
  for (std::size_t t = 0; t < d_out.rows(); ++t)
    for (std::size_t k = 0; k < step; ++k) {
      std::size_t dst = t * step + k;
      if (dst >= T) break;
      for (std::size_t c = 0; c < D; ++c)
        d_inputs(dst, c) += d_out(t, k * D + c);
    }
}

enum class EncoderKind { kFlat, kPyramidal };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kFlat;
  std::size_t layers = 1;
  std::size_t units = 8;  // per direction, per layer
  std::size_t pyramid_step = 2;
  double dropout = 0.0;

  void validate() const {
    if (layers < 1) throw ConfigError("encoder needs at least one layer");
    if (units < 1) throw ConfigError("encoder needs at least one unit");
    if (pyramid_step < 1) throw ConfigError("pyramid step must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0)
      throw ConfigError("dropout must lie in [0, 1)");
  }
};

struct EncoderCache {
  Matrix out;  // T_enc x 2*units
  std::vector<Matrix> layer_inputs;      // post-subsampling inputs per layer
  std::vector<BlstmLayerCache> layers;
  std::vector<Matrix> dropout_masks;     // empty when dropout was off
  std::size_t input_frames = 0;
  bool consumed = false;
};

// Stack of BLSTM layers.  The pyramidal kind subsamples before every layer,
// so L layers at step s shrink T by s^L; the flat kind keeps the frame rate.
class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, std::size_t feature_dim,
          std::string prefix)
      : cfg_(cfg), feature_dim_(feature_dim), prefix_(std::move(prefix)) {
    cfg_.validate();
    if (feature_dim < 1) throw ConfigError("encoder needs a feature dim");
  }

  void register_params(ParamStore& store) {
    layers_.clear();
    for (std::size_t l = 0; l < cfg_.layers; ++l)
      layers_.push_back(register_blstm_layer(
          store, prefix_ + "l" + std::to_string(l) + ".", layer_input_dim(l),
          cfg_.units));
  }

  std::size_t layer_input_dim(std::size_t layer) const {
    std::size_t base = layer == 0 ? feature_dim_ : 2 * cfg_.units;
    return cfg_.kind == EncoderKind::kPyramidal ? base * cfg_.pyramid_step
                                                : base;
  }

  std::size_t output_dim() const { return 2 * cfg_.units; }
  const EncoderConfig& config() const { return cfg_; }

  std::size_t output_frames(std::size_t input_frames) const {
    std::size_t t = input_frames;
    if (cfg_.kind == EncoderKind::kPyramidal)
      for (std::size_t l = 0; l < cfg_.layers; ++l)
        t = (t + cfg_.pyramid_step - 1) / cfg_.pyramid_step;
    return t;
  }

  // dropout_rng must be supplied when train_mode and dropout > 0.
  EncoderCache forward(ParamStore& store, const Matrix& features,
                       bool train_mode, Rng* dropout_rng = nullptr) const {
    if (features.rows() == 0)
      throw DataError("encoder input has no frames");
    if (features.cols() != feature_dim_)
      throw UsageError("encoder feature dim mismatch");
    if (layers_.size() != cfg_.layers)
      throw UsageError("encoder parameters not registered");
    const bool use_dropout = train_mode && cfg_.dropout > 0.0;
    if (use_dropout && dropout_rng == nullptr)
      throw UsageError("dropout requires an rng in train mode");

    EncoderCache cache;
    cache.input_frames = features.rows();
    Matrix x = features;
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
      if (cfg_.kind == EncoderKind::kPyramidal)
        x = pyramid_subsample(x, cfg_.pyramid_step);
      cache.layer_inputs.push_back(x);
      cache.layers.push_back(blstm_layer_forward(store, layers_[l], x));
      x = cache.layers.back().out;
      if (use_dropout) {
        Matrix mask(x.rows(), x.cols());
        const double keep = 1.0 - cfg_.dropout;
        for (std::size_t i = 0; i < mask.size(); ++i)
          mask.data()[i] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
          x.data()[i] *= mask.data()[i];
        cache.dropout_masks.push_back(std::move(mask));
      }
    }
    cache.out = x;
    return cache;
  }

  // Accumulates parameter gradients; optionally returns the gradient wrt
  // the original feature matrix.  A cache can back-propagate only once.
  void backward(ParamStore& store, EncoderCache& cache, const Matrix& d_out,
                Matrix* d_features = nullptr) const {
    if (cache.consumed)
      throw UsageError("encoder cache already consumed by a backward pass");
    cache.consumed = true;
    if (!d_out.same_shape(cache.out))
      throw UsageError("encoder backward gradient shape mismatch");

    Matrix d_x = d_out;
    for (std::size_t n = 0; n < cfg_.layers; ++n) {
      std::size_t l = cfg_.layers - 1 - n;
      if (!cache.dropout_masks.empty())
        for (std::size_t i = 0; i < d_x.size(); ++i)
          d_x.data()[i] *= cache.dropout_masks[l].data()[i];
      Matrix d_in(cache.layer_inputs[l].rows(), cache.layer_inputs[l].cols());
      blstm_layer_backward(store, layers_[l], cache.layers[l], d_x, d_in);
      if (cfg_.kind == EncoderKind::kPyramidal) {
        std::size_t prev_rows =
            l == 0 ? cache.input_frames : cache.layers[l - 1].out.rows();
        std::size_t prev_cols = l == 0 ? feature_dim_ : 2 * cfg_.units;
        Matrix d_prev(prev_rows, prev_cols);
        pyramid_subsample_backward(d_in, cfg_.pyramid_step, d_prev);
        d_x = std::move(d_prev);
      } else {
        d_x = std::move(d_in);
      }
    }
    if (d_features != nullptr) {
      if (!d_features->same_shape(d_x))
        throw UsageError("feature gradient shape mismatch");
      for (std::size_t i = 0; i < d_x.size(); ++i)
        d_features->data()[i] += d_x.data()[i];
    }
  }

 private:
  EncoderConfig cfg_;
  std::size_t feature_dim_;
  std::string prefix_;
  std::vector<BlstmLayerParams> layers_;
};

// Per-frame linear readout y = W_fwd h_fwd + W_bwd h_bwd + b, where h_fwd
// and h_bwd are the two direction halves of an encoder output frame.
struct OutputProjection {
  std::string prefix;
  std::size_t hidden_dim = 0;  // per direction
  std::size_t output_dim = 0;

  void register_params(ParamStore& store) const {
    store.add(prefix + "W_fwd", output_dim, hidden_dim);
    store.add(prefix + "W_bwd", output_dim, hidden_dim);
    store.add(prefix + "b", output_dim, 1);
  }

  // enc_out is T x 2*hidden_dim; returns T x output_dim logits.
  Matrix forward(ParamStore& store, const Matrix& enc_out) const {
    if (enc_out.cols() != 2 * hidden_dim)
      throw UsageError("output projection input dim mismatch");
    const Matrix& W_fwd = store.value(prefix + "W_fwd");
    const Matrix& W_bwd = store.value(prefix + "W_bwd");
    const Matrix& b = store.value(prefix + "b");

    Matrix logits(enc_out.rows(), output_dim);
    std::vector<double> h_fwd(hidden_dim), h_bwd(hidden_dim);
    std::vector<double> y(output_dim);
    for (std::size_t t = 0; t < enc_out.rows(); ++t) {
      for (std::size_t r = 0; r < hidden_dim; ++r) {
        h_fwd[r] = enc_out(t, r);
        h_bwd[r] = enc_out(t, hidden_dim + r);
      }
      for (std::size_t k = 0; k < output_dim; ++k) y[k] = b(k, 0);
      matvec(W_fwd, h_fwd, y);
      matvec(W_bwd, h_bwd, y);
      for (std::size_t k = 0; k < output_dim; ++k) logits(t, k) = y[k];
    }
    return logits;
  }

  void backward(ParamStore& store, const Matrix& enc_out,
                const Matrix& d_logits, Matrix& d_enc_out) const {
    if (!d_enc_out.same_shape(enc_out))
      throw UsageError("output projection backward shape mismatch");
    if (d_logits.rows() != enc_out.rows() || d_logits.cols() != output_dim)
      throw UsageError("output projection logit gradient mismatch");
    const Matrix& W_fwd = store.value(prefix + "W_fwd");
    const Matrix& W_bwd = store.value(prefix + "W_bwd");
    Matrix& g_W_fwd = store.grad(prefix + "W_fwd");
    Matrix& g_W_bwd = store.grad(prefix + "W_bwd");
    Matrix& g_b = store.grad(prefix + "b");

    std::vector<double> h_fwd(hidden_dim), h_bwd(hidden_dim);
    std::vector<double> dy(output_dim), dh_fwd(hidden_dim), dh_bwd(hidden_dim);
    for (std::size_t t = 0; t < enc_out.rows(); ++t) {
      for (std::size_t r = 0; r < hidden_dim; ++r) {
        h_fwd[r] = enc_out(t, r);
        h_bwd[r] = enc_out(t, hidden_dim + r);
      }
      for (std::size_t k = 0; k < output_dim; ++k) {
        dy[k] = d_logits(t, k);
        g_b(k, 0) += dy[k];
      }
      add_outer(g_W_fwd, dy, h_fwd);
      add_outer(g_W_bwd, dy, h_bwd);
      std::fill(dh_fwd.begin(), dh_fwd.end(), 0.0);
      std::fill(dh_bwd.begin(), dh_bwd.end(), 0.0);
      matvec_t(W_fwd, dy, dh_fwd);
      matvec_t(W_bwd, dy, dh_bwd);
      for (std::size_t r = 0; r < hidden_dim; ++r) {
        d_enc_out(t, r) += dh_fwd[r];
        d_enc_out(t, hidden_dim + r) += dh_bwd[r];
      }
    }
  }
};

}  // namespace tinyasr

#endif  // TINYASR_ENCODER_HPP_
