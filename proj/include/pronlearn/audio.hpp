// Copyright 2026 The pronlearn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRONLEARN_AUDIO_HPP_
#define PRONLEARN_AUDIO_HPP_

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace pronlearn {

inline constexpr int kDefaultSampleRate = 16000;
// Natural-log floor applied to Mel energies.
inline constexpr double kMelEnergyFloor = 1e-10;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
  bool operator==(const Waveform&) const = default;
};

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
};

void validate(const Waveform& w);

// Samples in [round(start * rate), round(end * rate)).
Waveform extract_span(const Waveform& w, const TimeSpan& span);

// Complex STFT, (n_fft / 2 + 1) bins by frame count.
using ComplexSpectrogram = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<double> hann_window(std::size_t n);
std::size_t frame_count(std::size_t samples, std::size_t n_fft, std::size_t hop);

// Periodic Hann window, no centering or padding: frame t covers samples
// [t * hop, t * hop + n_fft).
ComplexSpectrogram stft(const Waveform& w, std::size_t n_fft, std::size_t hop);

struct MelConfig {
  std::size_t n_fft = 512;
  std::size_t hop = 128;
  std::size_t n_mels = 40;
  double fmin = 0.0;
  double fmax = 8000.0;

  bool operator==(const MelConfig&) const = default;
};

double hz_to_mel(double hz);   // HTK: 2595 log10(1 + f / 700)
double mel_to_hz(double mel);

// Triangular filters, n_mels x (n_fft / 2 + 1).
Eigen::MatrixXd mel_filterbank(const MelConfig& config, int sample_rate);

struct MelSpectrogram {
  Eigen::MatrixXd log_mel;  // n_mels x n_frames
  MelConfig config;

  std::size_t n_mels() const { return static_cast<std::size_t>(log_mel.rows()); }
  std::size_t n_frames() const { return static_cast<std::size_t>(log_mel.cols()); }
};

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& config = {});

// RIFF WAVE, PCM 16-bit little-endian mono.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& w);
std::vector<char> encode_wav(const Waveform& w);
Waveform decode_wav(const std::vector<char>& bytes);
// Rounds every sample to the nearest 16-bit PCM level.
Waveform quantize_pcm16(const Waveform& w);

}  // namespace pronlearn

#endif  // PRONLEARN_AUDIO_HPP_
