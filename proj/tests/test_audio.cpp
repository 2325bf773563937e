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

#include <cmath>
#include <complex>
#include <filesystem>

#include "doctest.h"
#include "pronlearn/audio.hpp"
#include "pronlearn/errors.hpp"
#include "pronlearn/rng.hpp"

using namespace pronlearn;

namespace {

Waveform sine(double hz, std::size_t n, double amplitude = 0.5, int rate = kDefaultSampleRate) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * M_PI * hz * static_cast<double>(i) / rate);
  }
  return w;
}

Waveform noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (double& s : w.samples) s = rng.uniform(-0.9, 0.9);
  return w;
}

// Direct O(n^2) DFT of one Hann-windowed frame.
std::vector<std::complex<double>> naive_dft_frame(const std::vector<double>& x, std::size_t start,
                                                  std::size_t n) {
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double win = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
      acc += x[start + i] * win * std::polar(1.0, -2.0 * M_PI * static_cast<double>(k * i) / n);
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("extract_span") {
  const Waveform w = noise(16000, 1);
  CHECK(extract_span(w, {0.0, 1.0}) == w);
  CHECK(extract_span(w, {0.25, 0.75}).samples.size() == 8000);

  const Waveform first = extract_span(w, {0.1, 0.3137});
  const Waveform second = extract_span(w, {0.3137, 0.6});
  std::vector<double> joined = first.samples;
  joined.insert(joined.end(), second.samples.begin(), second.samples.end());
  CHECK(joined == extract_span(w, {0.1, 0.6}).samples);

  CHECK_THROWS_AS(extract_span(w, {0.5, 1.5}), InvalidArgument);
  CHECK_THROWS_AS(extract_span(w, {0.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(extract_span(w, {-0.1, 0.5}), InvalidArgument);
}

TEST_CASE("stft peaks at the bin of a bin-centered sine") {
  const std::size_t n_fft = 512;
  for (std::size_t k : {5u, 17u, 40u, 200u}) {
    const double hz = static_cast<double>(k) * kDefaultSampleRate / n_fft;
    const auto spec = stft(sine(hz, 4000), n_fft, 128);
    for (Eigen::Index t = 0; t < spec.cols(); ++t) {
      Eigen::Index arg = 0;
      spec.col(t).cwiseAbs().maxCoeff(&arg);
      CHECK(arg == static_cast<Eigen::Index>(k));
    }
  }
}

TEST_CASE("stft of silence is zero") {
  Waveform w;
  w.samples.assign(2048, 0.0);
  const auto spec = stft(w, 512, 128);
  CHECK(spec.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stft matches a naive DFT") {
  const Waveform w = noise(64, 7);
  for (std::size_t n_fft : {64u, 32u}) {
    const std::size_t hop = n_fft / 4;
    const auto spec = stft(w, n_fft, hop);
    for (Eigen::Index t = 0; t < spec.cols(); ++t) {
      const auto oracle = naive_dft_frame(w.samples, static_cast<std::size_t>(t) * hop, n_fft);
      for (std::size_t k = 0; k < oracle.size(); ++k) {
        CHECK(std::abs(std::abs(spec(static_cast<Eigen::Index>(k), t)) - std::abs(oracle[k])) < 1e-8);
      }
    }
  }
}

TEST_CASE("stft is linear in amplitude and frame counts follow the formula") {
  const Waveform w = noise(3000, 3);
  Waveform scaled = w;
  for (double& s : scaled.samples) s *= -0.37;
  const Eigen::MatrixXd a = stft(w, 256, 64).cwiseAbs();
  const Eigen::MatrixXd b = stft(scaled, 256, 64).cwiseAbs();
  CHECK(((b - 0.37 * a).cwiseAbs().maxCoeff()) < 1e-9);

  for (std::size_t len : {512u, 513u, 1000u, 4097u}) {
    for (std::size_t n_fft : {128u, 512u}) {
      for (std::size_t hop : {1u, 37u, 128u}) {
        if (len < n_fft) continue;
        const auto spec = stft(noise(len, len), n_fft, hop);
        CHECK(static_cast<std::size_t>(spec.cols()) == 1 + (len - n_fft) / hop);
        CHECK(static_cast<std::size_t>(spec.rows()) == n_fft / 2 + 1);
      }
    }
  }
  CHECK_THROWS_AS(stft(noise(100, 1), 512, 128), InvalidArgument);
  CHECK_THROWS_AS(stft(noise(1000, 1), 500, 128), InvalidArgument);
  CHECK_THROWS_AS(stft(noise(1000, 1), 256, 512), InvalidArgument);
}

TEST_CASE("Mel filterbank and spectrogram") {
  const MelConfig config;
  const auto bank = mel_filterbank(config, kDefaultSampleRate);
  CHECK(bank.rows() == 40);
  CHECK(bank.cols() == 257);
  for (Eigen::Index m = 0; m < bank.rows(); ++m) CHECK(bank.row(m).sum() > 0.0);

  Waveform silence;
  silence.samples.assign(4000, 0.0);
  const auto mel0 = mel_spectrogram(silence);
  CHECK(((mel0.log_mel.array() - std::log(kMelEnergyFloor)).abs() < 1e-12).all());

  const auto tone = mel_spectrogram(sine(300.0, 8000));
  for (Eigen::Index t = 0; t < tone.log_mel.cols(); ++t) {
    Eigen::Index arg = 0;
    tone.log_mel.col(t).maxCoeff(&arg);
    CHECK(arg < 20);
  }
  const auto again = mel_spectrogram(sine(300.0, 8000));
  CHECK(again.log_mel == tone.log_mel);

  MelConfig bad = config;
  bad.fmax = 9000.0;
  CHECK_THROWS_AS(mel_spectrogram(silence, bad), InvalidArgument);
  bad = config;
  bad.fmin = 8000.0;
  CHECK_THROWS_AS(mel_spectrogram(silence, bad), InvalidArgument);
  CHECK(hz_to_mel(mel_to_hz(1234.5)) == doctest::Approx(1234.5));
}

TEST_CASE("WAV round trip") {
  const Waveform w = quantize_pcm16(noise(1234, 5));
  const auto path = std::filesystem::temp_directory_path() / "pronlearn_wav_test.wav";
  write_wav(path, w);
  CHECK(read_wav(path) == w);
  CHECK(std::filesystem::file_size(path) == 44 + 2 * 1234);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(decode_wav(std::vector<char>{'R', 'I', 'F', 'F'}), IoError);
  CHECK_THROWS_AS(read_wav("/nonexistent.wav"), IoError);
}
