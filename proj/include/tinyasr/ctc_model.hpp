// tinyasr/ctc_model.hpp

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

#ifndef TINYASR_CTC_MODEL_HPP_
#define TINYASR_CTC_MODEL_HPP_

// End-to-end frame-labelling model: BLSTM encoder, per-frame linear readout
// and a blank-augmented softmax trained with the alignment-free sequence
// loss.  The blank is the last output column.

#include <cstddef>
#include <string>
#include <vector>

#include "tinyasr/ctc.hpp"
#include "tinyasr/encoder.hpp"
#include "tinyasr/numeric.hpp"
#include "tinyasr/param_store.hpp"
#include "tinyasr/rng.hpp"

namespace tinyasr {

struct CtcLossCache {
  EncoderCache enc;
  Matrix logits;     // T_enc x (num_targets + 1)
  Matrix log_probs;  // row-normalized
  CtcLattice lattice;
  bool consumed = false;
};

class CtcModel {
 public:
  CtcModel(const EncoderConfig& cfg, std::size_t feature_dim,
           std::size_t num_targets, std::string prefix = "ctc.")
      : encoder_(cfg, feature_dim, prefix + "enc.") {
    if (num_targets < 1) throw ConfigError("ctc model needs targets");
    proj_.prefix = prefix + "out.";
    proj_.hidden_dim = cfg.units;
    proj_.output_dim = num_targets + 1;  // trailing blank
  }

  std::size_t num_targets() const { return proj_.output_dim - 1; }
  std::size_t num_outputs() const { return proj_.output_dim; }
  int blank_id() const { return static_cast<int>(proj_.output_dim) - 1; }
  const Encoder& encoder() const { return encoder_; }

  void register_params(ParamStore& store) {
    encoder_.register_params(store);
    proj_.register_params(store);
  }

  // -log P(target | features).  Gaussian input noise applies only in train
  // mode; dropout_rng is required when the encoder drops units in train
  // mode.  Throws CtcInfeasibleError when the input is too short for the
  // target, before any gradient state is touched.
  double loss(ParamStore& store, const Matrix& features,
              const std::vector<int>& target, bool train_mode,
              const NoiseConfig& noise = {}, Rng* dropout_rng = nullptr,
              CtcLossCache* cache = nullptr) {
    Matrix input = features;
    if (train_mode && noise.sigma > 0.0)
      input = add_gaussian_noise(features, noise);
    EncoderCache enc = encoder_.forward(store, input, train_mode, dropout_rng);
    Matrix logits = proj_.forward(store, enc.out);
    logits.require_finite("ctc logits");
    Matrix log_probs = log_softmax_rows(logits);
    CtcResult result = ctc_loss(log_probs, target);
    if (cache) {
      cache->enc = std::move(enc);
      cache->logits = std::move(logits);
      cache->log_probs = std::move(log_probs);
      cache->lattice = std::move(result.lattice);
      cache->consumed = false;
    }
    return result.loss;
  }

  // Accumulates parameter gradients for one loss() call.  Single use.
  void loss_backward(ParamStore& store, CtcLossCache& cache) {
    if (cache.consumed)
      throw UsageError("ctc loss cache already consumed");
    cache.consumed = true;
    Matrix d_logits = ctc_gradient(cache.lattice, cache.log_probs);
    Matrix d_enc(cache.enc.out.rows(), cache.enc.out.cols());
    proj_.backward(store, cache.enc.out, d_logits, d_enc);
    encoder_.backward(store, cache.enc, d_enc);
  }

  // Best path decode: per-frame argmax, collapse runs, drop blanks.
  CtcHypothesis greedy_decode(ParamStore& store, const Matrix& features) {
    EncoderCache enc = encoder_.forward(store, features, false, nullptr);
    Matrix logits = proj_.forward(store, enc.out);
    logits.require_finite("ctc logits");
    return ctc_greedy_decode(log_softmax_rows(logits));
  }

 private:
  static Matrix log_softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t t = 0; t < logits.rows(); ++t)
      log_softmax({logits.data() + t * logits.cols(), logits.cols()},
                  {out.data() + t * out.cols(), out.cols()});
    return out;
  }

  Encoder encoder_;
  OutputProjection proj_;
};

}  // namespace tinyasr

#endif  // TINYASR_CTC_MODEL_HPP_
