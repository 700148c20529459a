// rfa/mfcc.cc
//
// Conventional MFCC front end: Hamming window, power spectrum, triangular
// mel filterbank spanning 0 Hz to Nyquist, log, orthonormal DCT-II,
// regression deltas with replicated edges.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rfa/error.h"
#include "rfa/features.h"
#include "rfa/fft.h"

namespace rfa {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Weights of `filters` triangles over FFT bins 0..fft_size/2.
Matrix mel_filterbank(int filters, std::size_t fft_size, double sample_rate) {
  const std::size_t bins = fft_size / 2 + 1;
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(filters + 2);
  for (int i = 0; i < filters + 2; ++i) {
    edges[i] = mel_to_hz(mel_hi * i / (filters + 1));
  }
  Matrix fb(filters, bins);
  for (int j = 0; j < filters; ++j) {
    const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = b * sample_rate / fft_size;
      if (f > lo && f < hi) fb(j, b) = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
  }
  return fb;
}

template <std::size_t D>
std::vector<std::array<double, D>> regression_deltas(
    const std::vector<std::array<double, D>>& x, int window) {
  const auto n = static_cast<long>(x.size());
  double denom = 0.0;
  for (int k = 1; k <= window; ++k) denom += 2.0 * k * k;
  std::vector<std::array<double, D>> d(x.size());
  for (long t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < D; ++c) {
      double s = 0.0;
      for (int k = 1; k <= window; ++k) {
        const long fwd = std::min(t + k, n - 1);
        const long back = std::max(t - k, 0L);
        s += k * (x[fwd][c] - x[back][c]);
      }
      d[t][c] = s / denom;
    }
  }
  return d;
}

}  // namespace

std::vector<std::array<double, kMfccFrameDim>> mfcc_frames(const AudioClip& clip,
                                                           const MfccConfig& cfg) {
  if (cfg.num_ceps != 13) {
    throw Error(Errc::kInvalidArgument, "mfcc: only 13 cepstra are supported");
  }
  if (cfg.num_filters < cfg.num_ceps) {
    throw Error(Errc::kInvalidArgument, "mfcc: fewer filters than cepstra");
  }
  const double fs = clip.sample_rate;
  const auto frame = static_cast<std::size_t>(std::lround(cfg.frame_s * fs));
  const auto hop = static_cast<std::size_t>(std::lround(cfg.hop_s * fs));
  if (frame < 2 || hop == 0) throw Error(Errc::kInvalidArgument, "mfcc: bad framing");
  if (clip.samples.size() < frame) throw Error(Errc::kTooShort, "mfcc: clip shorter than a frame");
  const std::size_t frames = (clip.samples.size() - frame) / hop + 1;

  std::size_t fft_size = 1;
  while (fft_size < frame) fft_size <<= 1;
  RealFft fft(fft_size);
  const Matrix fb = mel_filterbank(cfg.num_filters, fft_size, fs);

  std::vector<double> window(frame);
  for (std::size_t i = 0; i < frame; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (frame - 1));
  }
  const auto filters = static_cast<std::size_t>(cfg.num_filters);
  Matrix dct(13, filters);
  for (std::size_t k = 0; k < 13; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / filters);
    for (std::size_t j = 0; j < filters; ++j) {
      dct(k, j) = scale * std::cos(std::numbers::pi * k * (2.0 * j + 1.0) / (2.0 * filters));
    }
  }

  std::vector<std::array<double, 13>> ceps(frames);
  std::vector<double> buf(frame), power(fft_size / 2 + 1), logmel(filters);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < frame; ++i) buf[i] = clip.samples[f * hop + i] * window[i];
    auto spec = fft.forward(buf);
    for (std::size_t b = 0; b < power.size(); ++b) power[b] = std::norm(spec[b]);
    for (std::size_t j = 0; j < filters; ++j) {
      double e = 0.0;
      auto w = fb.row(j);
      for (std::size_t b = 0; b < power.size(); ++b) e += w[b] * power[b];
      logmel[j] = std::log(std::max(e, cfg.log_floor));
    }
    for (std::size_t k = 0; k < 13; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < filters; ++j) s += dct(k, j) * logmel[j];
      ceps[f][k] = s;
    }
  }

  auto d1 = regression_deltas(ceps, cfg.delta_window);
  auto d2 = regression_deltas(d1, cfg.delta_window);
  std::vector<std::array<double, kMfccFrameDim>> out(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    std::copy(ceps[f].begin(), ceps[f].end(), out[f].begin());
    std::copy(d1[f].begin(), d1[f].end(), out[f].begin() + 13);
    std::copy(d2[f].begin(), d2[f].end(), out[f].begin() + 26);
  }
  return out;
}

std::array<double, kMfccPooledDim> mfcc_features(const AudioClip& clip,
                                                 const MfccConfig& cfg,
                                                 const VadConfig& vad) {
  const auto frames = mfcc_frames(clip, cfg);
  VadConfig aligned = vad;
  aligned.frame_s = cfg.frame_s;
  aligned.hop_s = cfg.hop_s;
  const auto active = energy_vad(clip, aligned);

  std::array<double, kMfccPooledDim> out{};
  std::size_t count = 0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!active[f]) continue;
    ++count;
    for (std::size_t c = 0; c < kMfccFrameDim; ++c) out[c] += frames[f][c];
  }
  if (count < 3) {
    throw Error(Errc::kTooShort, "mfcc: too few voiced frames in '" + clip.utterance_id + "'");
  }
  for (std::size_t c = 0; c < kMfccFrameDim; ++c) out[c] /= count;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!active[f]) continue;
    for (std::size_t c = 0; c < kMfccFrameDim; ++c) {
      const double d = frames[f][c] - out[c];
      out[kMfccFrameDim + c] += d * d;
    }
  }
  for (std::size_t c = 0; c < kMfccFrameDim; ++c) {
    out[kMfccFrameDim + c] = std::sqrt(out[kMfccFrameDim + c] / count);
  }
  return out;
}

}  // namespace rfa
