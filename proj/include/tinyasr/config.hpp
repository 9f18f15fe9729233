// tinyasr/config.hpp

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

#ifndef TINYASR_CONFIG_HPP_
#define TINYASR_CONFIG_HPP_

// Experiment configuration: an INI-style file with [model], [encoder],
// [attention], [training] and [decoding] sections.  Unknown sections or keys
// are rejected with their line number; unset keys fall back to defaults.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "tinyasr/common.hpp"
#include "tinyasr/encoder.hpp"
#include "tinyasr/targets.hpp"

namespace tinyasr {

enum class ModelKind { kCtc, kAttention };

inline std::string model_kind_name(ModelKind kind) {
  return kind == ModelKind::kCtc ? "ctc" : "attention";
}

inline ModelKind model_kind_from_name(const std::string& name) {
  if (name == "ctc") return ModelKind::kCtc;
  if (name == "attention") return ModelKind::kAttention;
  throw ConfigError("unknown model kind \"" + name +
                    "\" (expected ctc or attention)");
}

struct TrainingConfig {
  std::size_t epochs = 0;  // resolved from the model kind when left unset
  std::size_t batch_size = 32;
  double base_lr = 0.05;
  double lr_decay = 0.1;
  double noise_sigma = 0.6;
  std::uint64_t seed = 1;
};

struct DecodingConfig {
  std::size_t beam_width = 16;
  std::size_t max_decode_len = 0;  // 0 derives a cap from encoder length
};

struct ExperimentConfig {
  ModelKind model = ModelKind::kCtc;
  Scheme scheme = Scheme::kReduced;
  std::string alphabet_path;
  std::string lexicon_path;
  EncoderConfig encoder;  // encoder.kind follows the model kind
  std::size_t speller_layers = 2;
  std::size_t speller_units = 64;
  std::size_t embed_dim = 64;
  std::size_t attn_dim = 64;
  TrainingConfig training;
  DecodingConfig decoding;

  void validate() const {
    if (training.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (training.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (training.base_lr <= 0.0) throw ConfigError("base_lr must be > 0");
    if (training.lr_decay <= 0.0 || training.lr_decay > 1.0)
      throw ConfigError("lr_decay must lie in (0, 1]");
    if (training.noise_sigma < 0.0)
      throw ConfigError("noise_sigma must be >= 0");
    if (decoding.beam_width < 1) throw ConfigError("beam_width must be >= 1");
    if (alphabet_path.empty()) throw ConfigError("alphabet path is required");
    if (scheme == Scheme::kReduced && lexicon_path.empty())
      throw ConfigError("the reduced scheme requires a lexicon path");
    encoder.validate();
    if (model == ModelKind::kAttention) {
      if (speller_layers < 1 || speller_units < 1)
        throw ConfigError("attention speller needs layers and units");
      if (embed_dim < 1 || attn_dim < 1)
        throw ConfigError("attention embed/attn dims must be >= 1");
    }
  }
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct ConfigLine {
  std::size_t number = 0;
  std::string key, value;
};

inline ConfigError bad_value(const ConfigLine& line, const std::string& want) {
  return ConfigError("config line " + std::to_string(line.number) + ": " +
                     line.key + " expects " + want + ", got \"" + line.value +
                     "\"");
}

inline std::size_t parse_count(const ConfigLine& line) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(line.value, &pos);
    if (pos != line.value.size() || v < 0) throw std::invalid_argument("");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw bad_value(line, "a non-negative integer");
  }
}

inline std::uint64_t parse_seed(const ConfigLine& line) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(line.value, &pos);
    if (pos != line.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw bad_value(line, "an unsigned integer");
  }
}

inline double parse_real(const ConfigLine& line) {
  try {
    std::size_t pos = 0;
    double v = std::stod(line.value, &pos);
    if (pos != line.value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw bad_value(line, "a number");
  }
}

}  // namespace detail

// Parses the experiment file and applies defaults: batch 32, lr decay 0.1,
// input noise 0.6, dropout 0.5, beam 16, and 250 (ctc) or 400 (attention)
// epochs when the file leaves them unset.
inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  ExperimentConfig cfg;
  cfg.encoder.layers = 2;
  cfg.encoder.units = 64;
  cfg.encoder.dropout = 0.5;
  std::optional<std::size_t> epochs;

  std::string section, raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::strip(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "model" && section != "encoder" &&
          section != "attention" && section != "training" &&
          section != "decoding")
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown section [" + section + "]");
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    detail::ConfigLine cl{line_no, detail::strip(line.substr(0, eq)),
                          detail::strip(line.substr(eq + 1))};
    if (cl.key.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key");

    if (section == "model") {
      if (cl.key == "kind") {
        try {
          cfg.model = model_kind_from_name(cl.value);
        } catch (const ConfigError&) {
          throw detail::bad_value(cl, "ctc or attention");
        }
      } else if (cl.key == "scheme") {
        try {
          cfg.scheme = scheme_from_name(cl.value);
        } catch (const std::exception&) {
          throw detail::bad_value(cl, "unified or reduced");
        }
      } else if (cl.key == "alphabet") {
        cfg.alphabet_path = cl.value;
      } else if (cl.key == "lexicon") {
        cfg.lexicon_path = cl.value;
      } else {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown key \"" + cl.key + "\" in [model]");
      }
    } else if (section == "encoder") {
      if (cl.key == "layers") cfg.encoder.layers = detail::parse_count(cl);
      else if (cl.key == "units") cfg.encoder.units = detail::parse_count(cl);
      else if (cl.key == "pyramid_step")
        cfg.encoder.pyramid_step = detail::parse_count(cl);
      else if (cl.key == "dropout") cfg.encoder.dropout = detail::parse_real(cl);
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown key \"" + cl.key + "\" in [encoder]");
    } else if (section == "attention") {
      if (cl.key == "speller_layers")
        cfg.speller_layers = detail::parse_count(cl);
      else if (cl.key == "speller_units")
        cfg.speller_units = detail::parse_count(cl);
      else if (cl.key == "embed_dim") cfg.embed_dim = detail::parse_count(cl);
      else if (cl.key == "attn_dim") cfg.attn_dim = detail::parse_count(cl);
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown key \"" + cl.key + "\" in [attention]");
    } else if (section == "training") {
      if (cl.key == "epochs") epochs = detail::parse_count(cl);
      else if (cl.key == "batch_size")
        cfg.training.batch_size = detail::parse_count(cl);
      else if (cl.key == "base_lr") cfg.training.base_lr = detail::parse_real(cl);
      else if (cl.key == "lr_decay")
        cfg.training.lr_decay = detail::parse_real(cl);
      else if (cl.key == "noise_sigma")
        cfg.training.noise_sigma = detail::parse_real(cl);
      else if (cl.key == "seed") cfg.training.seed = detail::parse_seed(cl);
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown key \"" + cl.key + "\" in [training]");
    } else if (section == "decoding") {
      if (cl.key == "beam_width")
        cfg.decoding.beam_width = detail::parse_count(cl);
      else if (cl.key == "max_decode_len")
        cfg.decoding.max_decode_len = detail::parse_count(cl);
      else
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unknown key \"" + cl.key + "\" in [decoding]");
    } else {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": key outside any section");
    }
  }

  cfg.training.epochs =
      epochs.value_or(cfg.model == ModelKind::kCtc ? 250 : 400);
  cfg.encoder.kind = cfg.model == ModelKind::kCtc ? EncoderKind::kFlat
                                                  : EncoderKind::kPyramidal;
  cfg.validate();
  return cfg;
}

}  // namespace tinyasr

#endif  // TINYASR_CONFIG_HPP_
