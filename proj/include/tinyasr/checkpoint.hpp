// tinyasr/checkpoint.hpp

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

#ifndef TINYASR_CHECKPOINT_HPP_
#define TINYASR_CHECKPOINT_HPP_

// Model checkpoints: a binary file carrying the architecture shape, the
// target scheme, a content hash of the alphabet it was trained against, and
// every parameter tensor.  Decoding refuses checkpoints whose scheme or
// alphabet differ from the current setup, which catches the classic mistake
// of pairing a model with the wrong symbol table.

#include <cstdint>
#include <fstream>
#include <string>

#include "tinyasr/binio.hpp"
#include "tinyasr/common.hpp"
#include "tinyasr/config.hpp"
#include "tinyasr/param_store.hpp"

namespace tinyasr {

struct Checkpoint {
  ModelKind model = ModelKind::kCtc;
  Scheme scheme = Scheme::kUnified;
  std::uint64_t alphabet_hash = 0;
  std::size_t feature_dim = 0;
  std::size_t num_targets = 0;  // alphabet size; blank/eos rows are implied
  EncoderConfig encoder;
  std::size_t speller_layers = 0;  // the speller block is all zeros
  std::size_t speller_units = 0;   // for ctc checkpoints
  std::size_t embed_dim = 0;
  std::size_t attn_dim = 0;
  ParamStore params;
};

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);

  binio::write_tag(out, "CSE2");
  binio::write_u32(out, 1);  // format version
  binio::write_u16(out, ckpt.model == ModelKind::kCtc ? 0 : 1);
  binio::write_u16(out, ckpt.scheme == Scheme::kUnified ? 0 : 1);
  binio::write_u64(out, ckpt.alphabet_hash);
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.feature_dim));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.num_targets));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.encoder.layers));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.encoder.units));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.encoder.pyramid_step));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.speller_layers));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.speller_units));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.embed_dim));
  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.attn_dim));

  binio::write_u32(out, static_cast<std::uint32_t>(ckpt.params.tensor_count()));
  for (const auto& [name, entry] : ckpt.params.entries()) {
    binio::write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    binio::write_u32(out, static_cast<std::uint32_t>(entry.value.rows()));
    binio::write_u32(out, static_cast<std::uint32_t>(entry.value.cols()));
    const double* p = entry.value.data();
    for (std::size_t i = 0; i < entry.value.size(); ++i) binio::write_f64(out, p[i]);
  }
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);

  std::string tag = binio::read_tag(in, "checkpoint magic");
  if (tag != "CSE2")
    throw DataError("not a checkpoint file (bad magic \"" + tag + "\"): " +
                    path);
  std::uint32_t version = binio::read_u32(in, "checkpoint version");
  if (version != 1)
    throw DataError("unsupported checkpoint version " +
                    std::to_string(version));

  Checkpoint ckpt;
  std::uint16_t kind = binio::read_u16(in, "model kind");
  if (kind > 1) throw DataError("checkpoint has unknown model kind");
  ckpt.model = kind == 0 ? ModelKind::kCtc : ModelKind::kAttention;
  std::uint16_t scheme = binio::read_u16(in, "target scheme");
  if (scheme > 1) throw DataError("checkpoint has unknown target scheme");
  ckpt.scheme = scheme == 0 ? Scheme::kUnified : Scheme::kReduced;
  ckpt.alphabet_hash = binio::read_u64(in, "alphabet hash");
  ckpt.feature_dim = binio::read_u32(in, "feature dim");
  ckpt.num_targets = binio::read_u32(in, "target count");
  ckpt.encoder.layers = binio::read_u32(in, "encoder layers");
  ckpt.encoder.units = binio::read_u32(in, "encoder units");
  ckpt.encoder.pyramid_step = binio::read_u32(in, "pyramid step");
  ckpt.encoder.kind = ckpt.model == ModelKind::kCtc ? EncoderKind::kFlat
                                                    : EncoderKind::kPyramidal;
  ckpt.speller_layers = binio::read_u32(in, "speller layers");
  ckpt.speller_units = binio::read_u32(in, "speller units");
  ckpt.embed_dim = binio::read_u32(in, "embedding dim");
  ckpt.attn_dim = binio::read_u32(in, "attention dim");

  std::uint32_t count = binio::read_u32(in, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = binio::read_u32(in, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("truncated checkpoint: tensor name");
    std::uint32_t rows = binio::read_u32(in, "tensor rows");
    std::uint32_t cols = binio::read_u32(in, "tensor cols");
    Matrix& m = ckpt.params.add(name, rows, cols);
    double* p = m.data();
    for (std::size_t k = 0; k < m.size(); ++k)
      p[k] = binio::read_f64(in, "tensor " + name);
  }
  return ckpt;
}

// Copies parameter values from a loaded checkpoint into a freshly registered
// store.  The tensor sets must match exactly, name for name and shape for
// shape; anything else means the checkpoint was built for a different
// architecture.
inline void load_params_into(ParamStore& dst, const ParamStore& src) {
  for (const auto& [name, entry] : src.entries())
    if (!dst.has(name))
      throw DataError("checkpoint tensor \"" + name +
                      "\" does not exist in this model");
  for (auto& [name, entry] : dst.entries()) {
    if (!src.has(name))
      throw DataError("checkpoint is missing tensor \"" + name + "\"");
    const Matrix& from = src.at(name).value;
    if (from.rows() != entry.value.rows() ||
        from.cols() != entry.value.cols())
      throw DataError("checkpoint tensor \"" + name + "\" has shape " +
                      std::to_string(from.rows()) + "x" +
                      std::to_string(from.cols()) + " but the model expects " +
                      std::to_string(entry.value.rows()) + "x" +
                      std::to_string(entry.value.cols()));
    entry.value = from;
  }
}

}  // namespace tinyasr

#endif  // TINYASR_CHECKPOINT_HPP_
