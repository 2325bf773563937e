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

#include "pronlearn/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>

#include "pronlearn/errors.hpp"

namespace pronlearn {
namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// FFTW plans are cached per size; planning is not thread safe, execution on
// fresh aligned buffers is.
struct RealFftPlan {
  fftw_plan plan = nullptr;
  std::size_t n = 0;
};

const RealFftPlan& real_fft_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<RealFftPlan>> plans;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = plans[n];
  if (!slot) {
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    slot = std::make_unique<RealFftPlan>();
    slot->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    slot->n = n;
    fftw_free(in);
    fftw_free(out);
    if (!slot->plan) throw NumericError("FFT planning failed");
  }
  return *slot;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

void validate(const Waveform& w) {
  if (w.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw InvalidArgument("waveform contains non-finite samples");
  }
}

Waveform extract_span(const Waveform& w, const TimeSpan& span) {
  validate(w);
  if (!(span.start >= 0.0) || !(span.end > span.start)) {
    throw InvalidArgument("time span must satisfy 0 <= start < end");
  }
  const auto begin = static_cast<std::size_t>(std::llround(span.start * w.sample_rate));
  const auto end = static_cast<std::size_t>(std::llround(span.end * w.sample_rate));
  if (end > w.samples.size()) throw InvalidArgument("time span extends past the waveform");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.begin() + static_cast<long>(begin),
                     w.samples.begin() + static_cast<long>(end));
  return out;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> win(n);
  for (std::size_t i = 0; i < n; ++i) {
    win[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
  }
  return win;
}

std::size_t frame_count(std::size_t samples, std::size_t n_fft, std::size_t hop) {
  if (samples < n_fft) return 0;
  return 1 + (samples - n_fft) / hop;
}

ComplexSpectrogram stft(const Waveform& w, std::size_t n_fft, std::size_t hop) {
  validate(w);
  if (!is_power_of_two(n_fft)) throw InvalidArgument("n_fft must be a power of two");
  if (hop == 0 || hop > n_fft) throw InvalidArgument("hop must be in [1, n_fft]");
  if (w.samples.size() < n_fft) throw InvalidArgument("waveform is shorter than one STFT frame");
  const std::size_t frames = frame_count(w.samples.size(), n_fft, hop);
  const std::size_t bins = n_fft / 2 + 1;
  const auto& plan = real_fft_plan(n_fft);
  const auto window = hann_window(n_fft);
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(n_fft));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(bins));
  ComplexSpectrogram spec(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(frames));
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = w.samples.data() + t * hop;
    for (std::size_t i = 0; i < n_fft; ++i) in.get()[i] = src[i] * window[i];
    fftw_execute_dft_r2c(plan.plan, in.get(), out.get());
    for (std::size_t k = 0; k < bins; ++k) {
      spec(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = {out.get()[k][0], out.get()[k][1]};
    }
  }
  return spec;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Eigen::MatrixXd mel_filterbank(const MelConfig& config, int sample_rate) {
  if (sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  if (!(config.fmin >= 0.0) || !(config.fmin < config.fmax) ||
      config.fmax > sample_rate / 2.0) {
    throw InvalidArgument("Mel bounds must satisfy 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (config.n_mels == 0) throw InvalidArgument("n_mels must be positive");
  if (!is_power_of_two(config.n_fft)) throw InvalidArgument("n_fft must be a power of two");
  const std::size_t bins = config.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);
  std::vector<double> edges(config.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(config.n_mels + 1));
  }
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.n_mels),
                                               static_cast<Eigen::Index>(bins));
  for (std::size_t m = 0; m < config.n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(config.n_fft);
      double weight = 0.0;
      if (f > lo && f <= center) {
        weight = (f - lo) / (center - lo);
      } else if (f > center && f < hi) {
        weight = (hi - f) / (hi - center);
      }
      bank(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = weight;
    }
    if (bank.row(static_cast<Eigen::Index>(m)).sum() <= 0.0) {
      throw InvalidArgument("Mel filter " + std::to_string(m) +
                            " covers no FFT bin; lower n_mels or raise n_fft");
    }
  }
  return bank;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& config) {
  const Eigen::MatrixXd bank = mel_filterbank(config, w.sample_rate);
  const ComplexSpectrogram spec = stft(w, config.n_fft, config.hop);
  const Eigen::MatrixXd power = spec.cwiseAbs2();
  MelSpectrogram out;
  out.config = config;
  out.log_mel = (bank * power).array().max(kMelEnergyFloor).log().matrix();
  return out;
}

Waveform quantize_pcm16(const Waveform& w) {
  Waveform out = w;
  for (double& s : out.samples) {
    const double level = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    s = level / 32768.0;
  }
  return out;
}

namespace {

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const std::vector<char>& b, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + i])) << (8 * i);
  return v;
}

std::uint16_t get_u16(const std::vector<char>& b, std::size_t pos) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[pos]) |
                                    (static_cast<unsigned char>(b[pos + 1]) << 8));
}

}  // namespace

std::vector<char> encode_wav(const Waveform& w) {
  validate(w);
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::vector<char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (double s : w.samples) {
    const auto level = static_cast<std::int16_t>(std::clamp(std::round(s * 32768.0), -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(level));
  }
  return out;
}

Waveform decode_wav(const std::vector<char>& b) {
  auto tag = [&b](std::size_t pos, const char* t) {
    return pos + 4 <= b.size() && std::memcmp(b.data() + pos, t, 4) == 0;
  };
  if (!tag(0, "RIFF") || !tag(8, "WAVE")) throw IoError("not a RIFF/WAVE file");
  std::size_t pos = 12;
  bool have_fmt = false;
  Waveform w;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size()) throw IoError("WAV chunk extends past end of file");
    if (tag(pos, "fmt ")) {
      if (size < 16) throw IoError("WAV fmt chunk too short");
      if (get_u16(b, body) != 1 || get_u16(b, body + 2) != 1 || get_u16(b, body + 14) != 16) {
        throw IoError("only PCM 16-bit mono WAV is supported");
      }
      w.sample_rate = static_cast<int>(get_u32(b, body + 4));
      have_fmt = true;
    } else if (tag(pos, "data")) {
      if (!have_fmt) throw IoError("WAV data chunk precedes fmt chunk");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        w.samples[i] = static_cast<std::int16_t>(get_u16(b, body + 2 * i)) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw IoError("WAV file has no data chunk");
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto bytes = encode_wav(w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace pronlearn
