// rfa/rhythm_spectra.cc

#include "rfa/rhythm_spectra.h"

#include <algorithm>
#include <cmath>

#include "rfa/error.h"
#include "rfa/fft.h"
#include "rfa/io_util.h"

namespace rfa {
namespace {

std::size_t window_length(const Envelope& env, double window_s) {
  if (!(window_s > 0)) throw Error(Errc::kInvalidArgument, "window length must be positive");
  const auto len = static_cast<std::size_t>(std::lround(window_s * env.rate));
  if (len < 2) throw Error(Errc::kInvalidArgument, "window shorter than two envelope samples");
  return len;
}

// Frequency axis shared by every column computed with the same padding.
void band_axis(std::size_t padded, double rate, double max_freq,
               std::vector<double>& freqs) {
  freqs.clear();
  const double res = rate / static_cast<double>(padded);
  for (std::size_t k = 1; k <= padded / 2; ++k) {
    const double f = k * res;
    if (f > max_freq + 1e-9 * res) break;
    freqs.push_back(f);
  }
}

// Normalized band magnitudes of one window into `out`.
void spectrum_column(std::span<const double> window, RealFft& fft, std::size_t bins,
                     const std::string& context, std::span<double> out) {
  double mean = 0.0;
  for (double v : window) mean += v;
  mean /= static_cast<double>(window.size());
  std::vector<double> centred(window.size());
  double spread = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    centred[i] = window[i] - mean;
    spread = std::max(spread, std::abs(centred[i]));
  }
  if (spread <= 1e-12 * std::max(1.0, std::abs(mean))) {
    throw Error(Errc::kFlatWindow, "flat window " + context);
  }
  auto spec = fft.forward(centred);
  double peak = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    out[b] = std::abs(spec[b + 1]);
    peak = std::max(peak, out[b]);
  }
  if (peak <= 0.0) throw Error(Errc::kFlatWindow, "flat window " + context);
  for (std::size_t b = 0; b < bins; ++b) out[b] /= peak;
}

std::string window_context(const Envelope& env, double start_s) {
  return "in '" + env.source_utterance + "' at " + format_double(start_s) + " s";
}

}  // namespace

LfSpectrum lf_spectrum(const Envelope& env, double start_s, double window_s,
                       const SpectrumConfig& cfg) {
  if (env.rate <= 0) throw Error(Errc::kInvalidArgument, "lf_spectrum: bad envelope rate");
  const std::size_t len = window_length(env, window_s);
  const double pos = start_s * env.rate;
  if (pos < -1e-9) throw Error(Errc::kOutOfRange, "lf_spectrum: window starts before 0");
  const auto start = static_cast<std::size_t>(std::lround(std::max(pos, 0.0)));
  if (start + len > env.values.size()) {
    throw Error(Errc::kOutOfRange, "lf_spectrum: window exceeds envelope extent");
  }
  const std::size_t padded = len * static_cast<std::size_t>(std::max(cfg.pad_factor, 1));
  LfSpectrum out;
  band_axis(padded, env.rate, cfg.max_freq_hz, out.freqs);
  if (out.freqs.empty()) throw Error(Errc::kInvalidArgument, "lf_spectrum: empty band");
  out.resolution = env.rate / static_cast<double>(padded);
  out.mags.resize(out.freqs.size());
  RealFft fft(padded);
  spectrum_column({env.values.data() + start, len}, fft, out.freqs.size(),
                  window_context(env, start_s), out.mags);
  return out;
}

LfSpectrogram lf_spectrogram(const Envelope& env, double window_s, std::size_t frames,
                             const SpectrumConfig& cfg) {
  if (env.rate <= 0) throw Error(Errc::kInvalidArgument, "lf_spectrogram: bad envelope rate");
  if (frames < 2) throw Error(Errc::kInvalidArgument, "lf_spectrogram: need at least 2 frames");
  const std::size_t len = window_length(env, window_s);
  const double total = env.duration_s();
  if (!(total > window_s) || len > env.values.size()) {
    throw Error(Errc::kTooShort, "lf_spectrogram: envelope of '" + env.source_utterance +
                                     "' (" + format_double(total) +
                                     " s) not longer than the window (" +
                                     format_double(window_s) + " s)");
  }
  const std::size_t padded = len * static_cast<std::size_t>(std::max(cfg.pad_factor, 1));

  LfSpectrogram out;
  band_axis(padded, env.rate, cfg.max_freq_hz, out.freqs);
  if (out.freqs.empty()) throw Error(Errc::kInvalidArgument, "lf_spectrogram: empty band");
  out.resolution = env.rate / static_cast<double>(padded);
  out.window_s = window_s;
  out.kind = env.kind;
  out.mags = Matrix(out.freqs.size(), frames);
  out.frame_times.resize(frames);

  RealFft fft(padded);
  std::vector<double> column(out.freqs.size());
  const double step = (total - window_s) / static_cast<double>(frames - 1);
  for (std::size_t m = 0; m < frames; ++m) {
    const double start_s = m * step;
    const auto start = std::min(static_cast<std::size_t>(std::lround(start_s * env.rate)),
                                env.values.size() - len);
    spectrum_column({env.values.data() + start, len}, fft, column.size(),
                    window_context(env, start_s), column);
    for (std::size_t b = 0; b < column.size(); ++b) out.mags(b, m) = column[b];
    out.frame_times[m] = start_s + 0.5 * window_s;
  }
  return out;
}

std::vector<SpectralPeak> pick_peaks(std::span<const double> freqs,
                                     std::span<const double> mags, std::size_t k) {
  if (freqs.size() != mags.size()) {
    throw Error(Errc::kDimensionMismatch, "pick_peaks: freqs/mags length mismatch");
  }
  std::vector<SpectralPeak> peaks;
  const std::size_t n = mags.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(mags[i] > mags[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && mags[j + 1] == mags[i]) ++j;
    if (j + 1 < n && mags[j + 1] < mags[i]) peaks.push_back({i, freqs[i], mags[i]});
    i = j + 1;
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const SpectralPeak& a, const SpectralPeak& b) {
                     if (a.mag != b.mag) return a.mag > b.mag;
                     return a.freq < b.freq;
                   });
  if (peaks.size() > k) peaks.resize(k);
  return peaks;
}

RFormantTracks rformant_tracks(const LfSpectrogram& spec, std::size_t ranks) {
  RFormantTracks out;
  const std::size_t frames = spec.frames();
  out.freqs = Matrix(ranks, frames);
  out.mags = Matrix(ranks, frames);
  out.valid.assign(ranks * frames, 0);
  std::vector<double> column(spec.bins());
  for (std::size_t m = 0; m < frames; ++m) {
    for (std::size_t b = 0; b < spec.bins(); ++b) column[b] = spec.mags(b, m);
    auto peaks = pick_peaks(spec.freqs, column, ranks);
    for (std::size_t r = 0; r < peaks.size(); ++r) {
      out.freqs(r, m) = peaks[r].freq;
      out.mags(r, m) = peaks[r].mag;
      out.valid[r * frames + m] = 1;
    }
  }
  return out;
}

std::string spectrogram_to_tsv(const LfSpectrogram& spec) {
  std::string out = "freq_hz";
  for (double t : spec.frame_times) {
    out += '\t';
    out += format_double(t);
  }
  out += '\n';
  for (std::size_t b = 0; b < spec.bins(); ++b) {
    out += format_double(spec.freqs[b]);
    for (std::size_t m = 0; m < spec.frames(); ++m) {
      out += '\t';
      out += format_double(spec.mags(b, m));
    }
    out += '\n';
  }
  return out;
}

std::string tracks_to_csv(const RFormantTracks& tracks) {
  std::string out = "frame,rank,freq_hz,mag,valid\n";
  for (std::size_t m = 0; m < tracks.frames(); ++m) {
    for (std::size_t r = 0; r < tracks.ranks(); ++r) {
      out += std::to_string(m) + "," + std::to_string(r + 1) + "," +
             format_double(tracks.freqs(r, m)) + "," + format_double(tracks.mags(r, m)) +
             "," + (tracks.is_valid(r, m) ? "1" : "0") + "\n";
    }
  }
  return out;
}

}  // namespace rfa
