// tinyasr/features.hpp

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

#ifndef TINYASR_FEATURES_HPP_
#define TINYASR_FEATURES_HPP_

// Log mel filterbank frontend: pre-emphasis, Hamming windows, radix-2 FFT,
// triangular mel filters, per-utterance mean normalization, and the binary
// feature cache format.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "tinyasr/binio.hpp"
#include "tinyasr/common.hpp"
#include "tinyasr/matrix.hpp"
#include "tinyasr/wav.hpp"

namespace tinyasr {

struct FeatureConfig {
  int window_ms = 25;
  int shift_ms = 10;
  double pre_emphasis = 0.97;
  int num_filters = 26;
  int fft_size = 256;

  int window_samples(int sample_rate) const {
    return sample_rate * window_ms / 1000;
  }
  int shift_samples(int sample_rate) const {
    return sample_rate * shift_ms / 1000;
  }

  void validate(int sample_rate) const {
    if (shift_ms <= 0 || window_ms <= shift_ms)
      throw ConfigError("need window_ms > shift_ms > 0");
    if (pre_emphasis < 0.0 || pre_emphasis >= 1.0)
      throw ConfigError("pre_emphasis must lie in [0, 1)");
    if (num_filters < 1) throw ConfigError("num_filters must be positive");
    if (fft_size < window_samples(sample_rate) ||
        (fft_size & (fft_size - 1)) != 0)
      throw ConfigError("fft_size must be a power of two covering the window");
  }
};

struct FeatureMatrix {
  Matrix frames;  // T x num_filters
  std::string utterance_id;
};

inline AudioBuffer pre_emphasize(const AudioBuffer& audio, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0)
    throw UsageError("pre-emphasis factor must lie in [0, 1)");
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.resize(audio.samples.size());
  for (std::size_t t = 0; t < audio.samples.size(); ++t)
    out.samples[t] =
        audio.samples[t] - (t ? alpha * audio.samples[t - 1] : 0.0);
  return out;
}

// Splits the signal into overlapping frames and applies a Hamming window.
// Frame count follows floor((N - window)/shift) + 1; trailing samples that do
// not fill a window are dropped.
inline std::vector<std::vector<double>> frame_signal(
    const AudioBuffer& audio, const FeatureConfig& cfg,
    const std::string& utterance_id = "") {
  cfg.validate(audio.sample_rate);
  const std::size_t window =
      static_cast<std::size_t>(cfg.window_samples(audio.sample_rate));
  const std::size_t shift =
      static_cast<std::size_t>(cfg.shift_samples(audio.sample_rate));
  if (audio.samples.size() < window)
    throw DataError("audio too short for one window" +
                    (utterance_id.empty() ? std::string()
                                          : " in utterance " + utterance_id) +
                    ": " + std::to_string(audio.samples.size()) + " < " +
                    std::to_string(window) + " samples");

  std::vector<double> hamming(window);
  for (std::size_t n = 0; n < window; ++n)
    hamming[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n /
                                        static_cast<double>(window - 1));

  std::size_t num_frames = (audio.samples.size() - window) / shift + 1;
  std::vector<std::vector<double>> frames(num_frames);
  for (std::size_t f = 0; f < num_frames; ++f) {
    frames[f].resize(window);
    for (std::size_t n = 0; n < window; ++n)
      frames[f][n] = audio.samples[f * shift + n] * hamming[n];
  }
  return frames;
}

// In-place iterative radix-2 FFT.  Size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw UsageError("fft size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Triangular mel filters on FFT bins 0..fft_size/2, spanning 0 to Nyquist.
class MelFilterBank {
 public:
  MelFilterBank(int num_filters, int fft_size, int sample_rate) {
    if (num_filters < 1) throw UsageError("need at least one mel filter");
    const int num_bins = fft_size / 2 + 1;
    const double nyquist = sample_rate / 2.0;
    const double mel_max = hz_to_mel(nyquist);

    // Filter j rises over [p_{j-1}, p_j] and falls over [p_j, p_{j+1}],
    // with the points equally spaced on the mel scale.
    std::vector<double> points(num_filters + 2);
    for (int i = 0; i < num_filters + 2; ++i)
      points[i] = mel_to_hz(mel_max * i / (num_filters + 1)) *
                  fft_size / sample_rate;  // fractional bin index

    weights_ = Matrix(static_cast<std::size_t>(num_filters),
                      static_cast<std::size_t>(num_bins));
    for (int j = 0; j < num_filters; ++j) {
      double lo = points[j], mid = points[j + 1], hi = points[j + 2];
      for (int k = 0; k < num_bins; ++k) {
        double w = 0.0;
        if (k > lo && k < mid)
          w = (k - lo) / (mid - lo);
        else if (k >= mid && k < hi)
          w = (hi - k) / (hi - mid);
        weights_(j, k) = w;
      }
    }
  }

  static double hz_to_mel(double hz) {
    return 2595.0 * std::log10(1.0 + hz / 700.0);
  }
  static double mel_to_hz(double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  }

  std::size_t num_filters() const { return weights_.rows(); }
  std::size_t num_bins() const { return weights_.cols(); }
  double weight(std::size_t filter, std::size_t bin) const {
    return weights_(filter, bin);
  }

  // magnitude_spectrum has fft_size/2 + 1 entries
  std::vector<double> apply_log(const std::vector<double>& magnitude_spectrum,
                                double floor_energy = 1e-10) const {
    if (magnitude_spectrum.size() != num_bins())
      throw UsageError("spectrum size does not match the filterbank");
    std::vector<double> out(num_filters());
    for (std::size_t j = 0; j < num_filters(); ++j) {
      double energy = 0.0;
      for (std::size_t k = 0; k < num_bins(); ++k)
        energy += weights_(j, k) * magnitude_spectrum[k];
      out[j] = std::log(std::max(energy, floor_energy));
    }
    return out;
  }

 private:
  Matrix weights_;
};

inline std::vector<double> magnitude_spectrum(const std::vector<double>& frame,
                                              int fft_size) {
  if (static_cast<int>(frame.size()) > fft_size)
    throw UsageError("frame longer than fft size");
  std::vector<std::complex<double>> x(static_cast<std::size_t>(fft_size));
  for (std::size_t n = 0; n < frame.size(); ++n) x[n] = frame[n];
  fft_radix2(x);
  std::vector<double> mag(static_cast<std::size_t>(fft_size / 2 + 1));
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(x[k]);
  return mag;
}

inline std::vector<double> log_filterbank(const std::vector<double>& frame,
                                          const FeatureConfig& cfg,
                                          const MelFilterBank& bank) {
  return bank.apply_log(magnitude_spectrum(frame, cfg.fft_size));
}

inline std::vector<double> log_filterbank(const std::vector<double>& frame,
                                          const FeatureConfig& cfg,
                                          int sample_rate) {
  MelFilterBank bank(cfg.num_filters, cfg.fft_size, sample_rate);
  return log_filterbank(frame, cfg, bank);
}

// Subtracts the per-column mean from every row.
inline void mean_normalize(Matrix& features) {
  if (features.rows() == 0) return;
  for (std::size_t c = 0; c < features.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < features.rows(); ++r) mean += features(r, c);
    mean /= static_cast<double>(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) features(r, c) -= mean;
  }
}

inline FeatureMatrix extract_features(const AudioBuffer& audio,
                                      const FeatureConfig& cfg,
                                      const std::string& utterance_id = "") {
  AudioBuffer emphasized = pre_emphasize(audio, cfg.pre_emphasis);
  auto frames = frame_signal(emphasized, cfg, utterance_id);
  MelFilterBank bank(cfg.num_filters, cfg.fft_size, audio.sample_rate);

  FeatureMatrix out;
  out.utterance_id = utterance_id;
  out.frames = Matrix(frames.size(), static_cast<std::size_t>(cfg.num_filters));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    auto row = log_filterbank(frames[f], cfg, bank);
    for (std::size_t j = 0; j < row.size(); ++j) out.frames(f, j) = row[j];
  }
  mean_normalize(out.frames);
  out.frames.require_finite("features of " + utterance_id);
  return out;
}

// --- binary feature cache -------------------------------------------------
//
// Layout: magic "FBNK", version u32, T u32, D u32, then T*D little-endian
// f32 values in row-major order.

inline constexpr std::uint32_t kFeatureCacheVersion = 1;

inline void write_feature_cache(const std::string& path,
                                const FeatureMatrix& features) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write feature cache: " + path);
  binio::write_tag(os, "FBNK");
  binio::write_u32(os, kFeatureCacheVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(features.frames.rows()));
  binio::write_u32(os, static_cast<std::uint32_t>(features.frames.cols()));
  for (std::size_t i = 0; i < features.frames.size(); ++i)
    binio::write_f32(os, static_cast<float>(features.frames.data()[i]));
  if (!os) throw DataError("write failed: " + path);
}

inline FeatureMatrix read_feature_cache(const std::string& path,
                                        const std::string& utterance_id = "") {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open feature cache: " + path);
  if (binio::read_tag(is, path) != "FBNK")
    throw DataError("bad feature cache magic: " + path);
  std::uint32_t version = binio::read_u32(is, path);
  if (version != kFeatureCacheVersion)
    throw DataError("unsupported feature cache version " +
                    std::to_string(version) + ": " + path);
  std::uint32_t rows = binio::read_u32(is, path);
  std::uint32_t cols = binio::read_u32(is, path);
  if (rows == 0 || cols == 0)
    throw DataError("empty feature cache: " + path);

  FeatureMatrix out;
  out.utterance_id = utterance_id;
  out.frames = Matrix(rows, cols);
  for (std::size_t i = 0; i < out.frames.size(); ++i)
    out.frames.data()[i] = binio::read_f32(is, path);
  char extra;
  if (is.read(&extra, 1))
    throw DataError("trailing bytes in feature cache: " + path);
  out.frames.require_finite("feature cache " + path);
  return out;
}

}  // namespace tinyasr

#endif  // TINYASR_FEATURES_HPP_
