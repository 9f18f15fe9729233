// tinyasr/trainer.hpp

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

#ifndef TINYASR_TRAINER_HPP_
#define TINYASR_TRAINER_HPP_

// Training loop shared by both model kinds.  Utterances are loaded up front,
// sorted by frame count and grouped into fixed-size batches; each epoch
// visits the batches in a freshly shuffled order.  Gradients accumulate per
// utterance and the step divides the learning rate by the batch size, which
// makes the update a mean-gradient step.  The rate decays whenever the dev
// loss plateaus, and the parameters that scored the best dev loss are the
// ones written to the checkpoint.
//
// Every random choice is derived from the experiment seed, so a rerun with
// the same config reproduces the run bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tinyasr/attention.hpp"
#include "tinyasr/checkpoint.hpp"
#include "tinyasr/config.hpp"
#include "tinyasr/ctc_model.hpp"
#include "tinyasr/features.hpp"
#include "tinyasr/manifest.hpp"
#include "tinyasr/targets.hpp"
#include "tinyasr/wav.hpp"

namespace tinyasr {

// Decays the learning rate after `patience` consecutive epochs without a dev
// loss improvement.  An improvement must beat the best seen value by more
// than a hair, so bit-identical plateaus count as stalls.
class PlateauSchedule {
 public:
  PlateauSchedule(double base_lr, double decay, std::size_t patience = 3)
      : lr_(base_lr), decay_(decay), patience_(patience) {
    if (base_lr <= 0.0) throw UsageError("base_lr must be > 0");
    if (decay <= 0.0 || decay > 1.0)
      throw UsageError("decay must lie in (0, 1]");
    if (patience < 1) throw UsageError("patience must be >= 1");
  }

  double lr() const { return lr_; }
  double best() const { return best_; }

  // Feeds one dev loss; returns true when this observation triggered a
  // decay.
  bool observe(double dev_loss) {
    if (dev_loss < best_ - 1e-12) {
      best_ = dev_loss;
      stalls_ = 0;
      return false;
    }
    if (++stalls_ >= patience_) {
      lr_ *= decay_;
      stalls_ = 0;
      return true;
    }
    return false;
  }

 private:
  double lr_;
  double decay_;
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t stalls_ = 0;
};

struct TrainItem {
  std::string utterance_id;
  Matrix features;
  std::vector<int> labels;
};

// Loads features (from the cache file or by extracting from wav) and
// tokenizes every transcript under the given scheme.  The lexicon is only
// consulted for the reduced scheme.
inline std::vector<TrainItem> load_training_items(const Manifest& manifest,
                                                  const Alphabet& alphabet,
                                                  const Lexicon* lexicon) {
  std::vector<TrainItem> items;
  for (const ManifestEntry& entry : manifest.entries) {
    TrainItem item;
    item.utterance_id = entry.utterance_id;
    if (entry.has_features()) {
      item.features = read_feature_cache(entry.feature_path,
                                         entry.utterance_id).frames;
    } else {
      AudioBuffer audio = read_wav(entry.audio_path);
      item.features = extract_features(audio, FeatureConfig{},
                                       entry.utterance_id).frames;
    }
    if (alphabet.scheme() == Scheme::kReduced) {
      if (!lexicon)
        throw UsageError("the reduced scheme requires a lexicon");
      item.labels = tokenize_reduced(entry.transcript, *lexicon, alphabet).ids;
    } else {
      item.labels = tokenize_unified(entry.transcript, alphabet).ids;
    }
    items.push_back(std::move(item));
  }
  return items;
}

struct TrainResult {
  std::size_t epochs = 0;
  double final_train_loss = 0.0;
  double final_dev_loss = 0.0;
  double best_dev_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t skipped_total = 0;  // train utterances too short for ctc
};

struct TrainPaths {
  std::string train_manifest;
  std::string dev_manifest;
  std::string checkpoint;  // best-dev parameters; empty skips the write
  std::string csv;         // per-epoch log; empty skips the write
};

namespace detail {

inline std::string format_loss(double v) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(6) << v;
  return o.str();
}

inline std::string format_lr(double v) {
  std::ostringstream o;
  o << std::setprecision(8) << v;
  return o.str();
}

}  // namespace detail

inline TrainResult train_model(const ExperimentConfig& cfg,
                               const TrainPaths& paths,
                               std::ostream* progress = nullptr) {
  cfg.validate();
  Alphabet alphabet = load_alphabet(cfg.alphabet_path, cfg.scheme);
  std::optional<Lexicon> lexicon;
  if (cfg.scheme == Scheme::kReduced)
    lexicon = load_lexicon(cfg.lexicon_path, alphabet);

  std::vector<TrainItem> train_items = load_training_items(
      load_manifest(paths.train_manifest), alphabet,
      lexicon ? &*lexicon : nullptr);
  std::vector<TrainItem> dev_items = load_training_items(
      load_manifest(paths.dev_manifest), alphabet,
      lexicon ? &*lexicon : nullptr);
  if (train_items.empty())
    throw DataError("training manifest has no utterances: " +
                    paths.train_manifest);
  if (dev_items.empty())
    throw DataError("dev manifest has no utterances: " + paths.dev_manifest);

  std::size_t feature_dim = train_items.front().features.cols();
  for (const auto& items : {std::cref(train_items), std::cref(dev_items)})
    for (const TrainItem& item : items.get())
      if (item.features.cols() != feature_dim)
        throw DataError("feature dim mismatch at " + item.utterance_id +
                        ": expected " + std::to_string(feature_dim) +
                        ", got " + std::to_string(item.features.cols()));

  std::stable_sort(train_items.begin(), train_items.end(),
                   [](const TrainItem& x, const TrainItem& y) {
                     return x.features.rows() < y.features.rows();
                   });

  ParamStore store;
  std::optional<CtcModel> ctc;
  std::optional<LasModel> las;
  if (cfg.model == ModelKind::kCtc) {
    ctc.emplace(cfg.encoder, feature_dim, alphabet.size());
    ctc->register_params(store);
  } else {
    LasConfig lcfg;
    lcfg.num_targets = alphabet.size();
    lcfg.listener_layers = cfg.encoder.layers;
    lcfg.listener_units = cfg.encoder.units;
    lcfg.pyramid_step = cfg.encoder.pyramid_step;
    lcfg.dropout_rate = cfg.encoder.dropout;
    lcfg.speller_layers = cfg.speller_layers;
    lcfg.speller_units = cfg.speller_units;
    lcfg.embed_dim = cfg.embed_dim;
    lcfg.attn_dim = cfg.attn_dim;
    lcfg.beam_width = cfg.decoding.beam_width;
    lcfg.max_decode_len = cfg.decoding.max_decode_len;
    las.emplace(lcfg, feature_dim);
    las->register_params(store);
  }
  store.init_uniform_scaled(cfg.training.seed);

  // Runs one utterance; in train mode also accumulates its gradients.
  auto run_item = [&](const TrainItem& item, bool train,
                      const NoiseConfig& noise, Rng* dropout_rng) {
    if (ctc) {
      CtcLossCache cache;
      double l = ctc->loss(store, item.features, item.labels, train, noise,
                           dropout_rng, train ? &cache : nullptr);
      if (train) ctc->loss_backward(store, cache);
      return l;
    }
    LasLossCache cache;
    double l = las->loss(store, item.features, item.labels, train, noise,
                         dropout_rng, train ? &cache : nullptr);
    if (train) las->loss_backward(store, cache);
    return l;
  };

  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t b = 0; b < train_items.size();
       b += cfg.training.batch_size)
    batches.emplace_back(
        b, std::min(b + cfg.training.batch_size, train_items.size()));

  std::ofstream csv;
  if (!paths.csv.empty()) {
    csv.open(paths.csv);
    if (!csv) throw DataError("cannot write training log: " + paths.csv);
    csv << "epoch,train_loss,dev_loss,lr,skipped\n";
  }

  const std::uint64_t seed = cfg.training.seed;
  Rng dropout_rng(Rng::mix(seed, 77));
  PlateauSchedule schedule(cfg.training.base_lr, cfg.training.lr_decay);
  TrainResult result;
  std::map<std::string, Matrix> best_params;

  for (std::size_t epoch = 1; epoch <= cfg.training.epochs; ++epoch) {
    std::vector<std::size_t> order(batches.size());
    std::iota(order.begin(), order.end(), 0);
    Rng(Rng::mix(seed, 1000 + epoch)).shuffle(order);

    double train_sum = 0.0;
    std::size_t train_count = 0, skipped = 0;
    double lr_used = schedule.lr();

    for (std::size_t bi = 0; bi < order.size(); ++bi) {
      auto [begin, end] = batches[order[bi]];
      std::size_t contributed = 0;
      for (std::size_t i = begin; i < end; ++i) {
        NoiseConfig noise{cfg.training.noise_sigma,
                          Rng::mix(seed, epoch * 1000003ULL + i)};
        double l;
        try {
          l = run_item(train_items[i], true, noise, &dropout_rng);
        } catch (const CtcInfeasibleError&) {
          ++skipped;
          continue;
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(epoch) +
                             ", utterance " + train_items[i].utterance_id +
                             ": " + e.what());
        }
        if (!std::isfinite(l))
          throw NumericError("epoch " + std::to_string(epoch) + ", utterance " +
                             train_items[i].utterance_id +
                             ": loss is not finite");
        train_sum += l;
        ++train_count;
        ++contributed;
      }
      if (contributed == 0) continue;
      try {
        sgd_step(store, lr_used / static_cast<double>(contributed));
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(bi + 1) + ": " + e.what());
      }
    }
    if (train_count == 0)
      throw DataError("every training utterance was skipped in epoch " +
                      std::to_string(epoch));

    double dev_sum = 0.0;
    std::size_t dev_count = 0;
    for (const TrainItem& item : dev_items) {
      try {
        dev_sum += run_item(item, false, NoiseConfig{}, nullptr);
        ++dev_count;
      } catch (const CtcInfeasibleError&) {
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", utterance " +
                           item.utterance_id + ": " + e.what());
      }
    }
    if (dev_count == 0)
      throw DataError("no dev utterance could be scored in epoch " +
                      std::to_string(epoch));

    double train_loss = train_sum / static_cast<double>(train_count);
    double dev_loss = dev_sum / static_cast<double>(dev_count);
    if (!std::isfinite(dev_loss))
      throw NumericError("epoch " + std::to_string(epoch) +
                         ": dev loss is not finite");
    result.final_train_loss = train_loss;
    result.final_dev_loss = dev_loss;
    result.skipped_total += skipped;
    result.epochs = epoch;

    if (dev_loss < result.best_dev_loss - 1e-12) {
      result.best_dev_loss = dev_loss;
      result.best_epoch = epoch;
      best_params.clear();
      for (const auto& [name, entry] : store.entries())
        best_params.emplace(name, entry.value);
    }

    if (csv.is_open()) {
      csv << epoch << "," << detail::format_loss(train_loss) << ","
          << detail::format_loss(dev_loss) << "," << detail::format_lr(lr_used)
          << "," << skipped << "\n";
      csv.flush();
    }
    if (progress)
      *progress << "epoch " << epoch << "/" << cfg.training.epochs
                << "  train " << detail::format_loss(train_loss) << "  dev "
                << detail::format_loss(dev_loss) << "  lr "
                << detail::format_lr(lr_used) << "  skipped " << skipped
                << "\n";

    schedule.observe(dev_loss);
  }

  for (auto& [name, entry] : store.entries())
    entry.value = best_params.at(name);

  if (!paths.checkpoint.empty()) {
    Checkpoint ckpt;
    ckpt.model = cfg.model;
    ckpt.scheme = cfg.scheme;
    ckpt.alphabet_hash = alphabet.content_hash();
    ckpt.feature_dim = feature_dim;
    ckpt.num_targets = alphabet.size();
    ckpt.encoder = cfg.encoder;
    if (cfg.model == ModelKind::kAttention) {
      ckpt.speller_layers = cfg.speller_layers;
      ckpt.speller_units = cfg.speller_units;
      ckpt.embed_dim = cfg.embed_dim;
      ckpt.attn_dim = cfg.attn_dim;
    }
    ckpt.params = store;
    save_checkpoint(ckpt, paths.checkpoint);
  }
  return result;
}

}  // namespace tinyasr

#endif  // TINYASR_TRAINER_HPP_
