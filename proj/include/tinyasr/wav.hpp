// tinyasr/wav.hpp

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

#ifndef TINYASR_WAV_HPP_
#define TINYASR_WAV_HPP_

// Minimal RIFF/WAVE support: 16-bit PCM, mono.  That is all the corpus uses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tinyasr/binio.hpp"
#include "tinyasr/common.hpp"

namespace tinyasr {

struct AudioBuffer {
  std::vector<double> samples;  // scaled to [-1, 1)
  int sample_rate = 0;
};

// Reads a mono PCM16 wav file.  Rejects any other encoding, and rejects
// sample rates other than expected_rate when expected_rate > 0.
inline AudioBuffer read_wav(const std::string& path, int expected_rate = 8000) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open wav file: " + path);

  if (binio::read_tag(is, path) != "RIFF")
    throw DataError("not a RIFF file: " + path);
  binio::read_u32(is, path);  // riff chunk size, unused
  if (binio::read_tag(is, path) != "WAVE")
    throw DataError("not a WAVE file: " + path);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  AudioBuffer out;

  while (is.peek() != EOF) {
    std::string chunk = binio::read_tag(is, path);
    std::uint32_t chunk_size = binio::read_u32(is, path);
    if (chunk == "fmt ") {
      if (chunk_size < 16) throw DataError("malformed fmt chunk: " + path);
      format = binio::read_u16(is, path);
      channels = binio::read_u16(is, path);
      rate = binio::read_u32(is, path);
      binio::read_u32(is, path);  // byte rate
      binio::read_u16(is, path);  // block align
      bits = binio::read_u16(is, path);
      if (chunk_size > 16) is.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (chunk == "data") {
      if (!have_fmt) throw DataError("data chunk before fmt chunk: " + path);
      if (format != 1)
        throw DataError("unsupported wav encoding (want PCM): " + path);
      if (channels != 1)
        throw DataError("unsupported channel count (want mono): " + path);
      if (bits != 16)
        throw DataError("unsupported sample width (want 16-bit): " + path);
      if (expected_rate > 0 && rate != static_cast<std::uint32_t>(expected_rate))
        throw DataError("sample rate " + std::to_string(rate) + " in " + path +
                        ", expected " + std::to_string(expected_rate));
      std::uint32_t n = chunk_size / 2;
      out.samples.resize(n);
      for (std::uint32_t i = 0; i < n; ++i)
        out.samples[i] = binio::read_i16(is, path) / 32768.0;
      out.sample_rate = static_cast<int>(rate);
      if (out.samples.empty()) throw DataError("empty wav data chunk: " + path);
      return out;
    } else {
      // skip unknown chunks (LIST, fact, ...); chunks are word-aligned
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw DataError("no data chunk found: " + path);
}

// Writes a mono PCM16 wav file; samples are clamped to [-1, 1).
inline void write_wav(const std::string& path, const AudioBuffer& audio) {
  if (audio.samples.empty()) throw UsageError("refusing to write empty wav");
  if (audio.sample_rate <= 0) throw UsageError("invalid sample rate for wav");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write wav file: " + path);

  std::uint32_t data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  binio::write_tag(os, "RIFF");
  binio::write_u32(os, 36 + data_bytes);
  binio::write_tag(os, "WAVE");
  binio::write_tag(os, "fmt ");
  binio::write_u32(os, 16);
  binio::write_u16(os, 1);  // PCM
  binio::write_u16(os, 1);  // mono
  binio::write_u32(os, static_cast<std::uint32_t>(audio.sample_rate));
  binio::write_u32(os, static_cast<std::uint32_t>(audio.sample_rate * 2));
  binio::write_u16(os, 2);   // block align
  binio::write_u16(os, 16);  // bits per sample
  binio::write_tag(os, "data");
  binio::write_u32(os, data_bytes);
  for (double s : audio.samples) {
    double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    binio::write_i16(os, static_cast<std::int16_t>(std::lround(clamped * 32768.0)));
  }
  if (!os) throw DataError("write failed: " + path);
}

}  // namespace tinyasr

#endif  // TINYASR_WAV_HPP_
