// tinyasr/binio.hpp

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

#ifndef TINYASR_BINIO_HPP_
#define TINYASR_BINIO_HPP_

// Little-endian binary readers/writers for the on-disk formats (wav, feature
// cache, checkpoints).  Explicit byte assembly keeps the files portable across
// host endianness.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "tinyasr/common.hpp"

namespace tinyasr {
namespace binio {

inline void write_u16(std::ostream& os, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

inline void write_i16(std::ostream& os, std::int16_t v) {
  write_u16(os, static_cast<std::uint16_t>(v));
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  write_u32(os, static_cast<std::uint32_t>(v & 0xffffffffu));
  write_u32(os, static_cast<std::uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& os, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  write_u32(os, bits);
}

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  write_u32(os, static_cast<std::uint32_t>(bits & 0xffffffffu));
  write_u32(os, static_cast<std::uint32_t>(bits >> 32));
}

inline std::uint16_t read_u16(std::istream& is, const std::string& what) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2))
    throw DataError("truncated file while reading " + what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32(std::istream& is, const std::string& what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw DataError("truncated file while reading " + what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::int16_t read_i16(std::istream& is, const std::string& what) {
  return static_cast<std::int16_t>(read_u16(is, what));
}

inline std::uint64_t read_u64(std::istream& is, const std::string& what) {
  std::uint64_t lo = read_u32(is, what);
  std::uint64_t hi = read_u32(is, what);
  return lo | (hi << 32);
}

inline float read_f32(std::istream& is, const std::string& what) {
  return std::bit_cast<float>(read_u32(is, what));
}

inline double read_f64(std::istream& is, const std::string& what) {
  std::uint64_t lo = read_u32(is, what);
  std::uint64_t hi = read_u32(is, what);
  return std::bit_cast<double>(lo | (hi << 32));
}

inline void write_tag(std::ostream& os, const char (&tag)[5]) {
  os.write(tag, 4);
}

inline std::string read_tag(std::istream& is, const std::string& what) {
  char b[4];
  if (!is.read(b, 4)) throw DataError("truncated file while reading " + what);
  return std::string(b, 4);
}

}  // namespace binio
}  // namespace tinyasr

#endif  // TINYASR_BINIO_HPP_
