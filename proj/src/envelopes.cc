// rfa/envelopes.cc

#include "rfa/envelopes.h"

#include <algorithm>
#include <cmath>

#include "rfa/error.h"
#include "rfa/fft.h"
#include "rfa/io_util.h"

namespace rfa {
namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Index where block m of a decimation starts. The tiny offset absorbs
// representation error when the rate ratio is integral.
std::size_t block_start(std::size_t m, double ratio) {
  return static_cast<std::size_t>(std::floor(m * ratio + 1e-9));
}

}  // namespace

const char* envelope_kind_name(EnvelopeKind kind) {
  return kind == EnvelopeKind::kAm ? "AM" : "FM";
}

double F0Contour::voiced_fraction() const {
  if (voicing.empty()) return 0.0;
  std::size_t v = std::count(voicing.begin(), voicing.end(), 1);
  return static_cast<double>(v) / voicing.size();
}

std::vector<double> analytic_magnitude(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw Error(Errc::kEmptyInput, "analytic_magnitude: empty input");

  ComplexFft fwd(n, false);
  ComplexFft inv(n, true);
  auto buf = fwd.buffer();
  for (std::size_t i = 0; i < n; ++i) buf[i] = samples[i];
  fwd.execute();

  // Analytic-signal mask: DC (and Nyquist for even n) kept once, positive
  // frequencies doubled, negative frequencies removed.
  auto spec = inv.buffer();
  const std::size_t half = n / 2;
  spec[0] = buf[0];
  for (std::size_t k = 1; k < n; ++k) {
    if (n % 2 == 0 && k == half) {
      spec[k] = buf[k];
    } else if (k <= (n - 1) / 2) {
      spec[k] = 2.0 * buf[k];
    } else {
      spec[k] = 0.0;
    }
  }
  inv.execute();

  std::vector<double> mag(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(spec[i]) * scale;
  return mag;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t width) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  width = std::max<std::size_t>(width, 1);
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const std::size_t left = (width - 1) / 2;
  const std::size_t right = width - 1 - left;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n, i + right + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<double> block_decimate(std::span<const double> x, double in_rate,
                                   double out_rate) {
  if (in_rate <= 0 || out_rate <= 0 || out_rate > in_rate) {
    throw Error(Errc::kInvalidArgument, "block_decimate: bad rates");
  }
  const double ratio = in_rate / out_rate;
  const auto count =
      static_cast<std::size_t>(std::floor(x.size() / ratio + 1e-9));
  std::vector<double> out(count);
  for (std::size_t m = 0; m < count; ++m) {
    const std::size_t lo = block_start(m, ratio);
    const std::size_t hi = std::min(x.size(), block_start(m + 1, ratio));
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += x[i];
    out[m] = sum / static_cast<double>(hi - lo);
  }
  return out;
}

Envelope am_envelope(const AudioClip& clip, const EnvelopeConfig& cfg) {
  if (clip.sample_rate <= 0) throw Error(Errc::kInvalidArgument, "am_envelope: bad sample rate");
  if (cfg.rate_hz < 20.0) {
    throw Error(Errc::kInvalidArgument, "am_envelope: envelope rate below 20 Hz");
  }
  const auto width =
      static_cast<std::size_t>(std::lround(cfg.smoothing_s * clip.sample_rate));
  if (clip.samples.size() < std::max<std::size_t>(width, 1)) {
    throw Error(Errc::kTooShort, "am_envelope: clip '" + clip.utterance_id +
                                     "' shorter than the smoothing window");
  }
  auto mag = analytic_magnitude(clip.samples);
  auto smooth = moving_average(mag, width);
  Envelope env;
  env.values = block_decimate(smooth, clip.sample_rate, cfg.rate_hz);
  if (env.values.empty()) {
    throw Error(Errc::kTooShort, "am_envelope: clip shorter than one envelope sample");
  }
  env.rate = cfg.rate_hz;
  env.kind = EnvelopeKind::kAm;
  env.source_utterance = clip.utterance_id;
  return env;
}

F0Contour track_f0(const AudioClip& clip, const F0Config& cfg) {
  const double fs = clip.sample_rate;
  if (fs <= 0) throw Error(Errc::kInvalidArgument, "track_f0: bad sample rate");
  if (!(cfg.f_min > 0 && cfg.f_max > cfg.f_min)) {
    throw Error(Errc::kInvalidArgument, "track_f0: bad search range");
  }
  const auto frame = static_cast<std::size_t>(std::lround(cfg.frame_s * fs));
  const auto hop = static_cast<std::size_t>(std::lround(cfg.hop_s * fs));
  const std::size_t n = clip.samples.size();
  if (frame == 0 || hop == 0 || n < frame + hop) {
    throw Error(Errc::kTooShort, "track_f0: clip '" + clip.utterance_id +
                                     "' shorter than two analysis frames");
  }
  const auto lag_min = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(fs / cfg.f_max)));
  const auto lag_max = static_cast<std::size_t>(std::ceil(fs / cfg.f_min));
  const std::size_t frames = (n - frame) / hop + 1;

  // Zero-extend so every lagged window is addressable.
  std::vector<double> x(clip.samples);
  x.resize((frames - 1) * hop + frame + lag_max + 2, 0.0);
  std::vector<double> energy_prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    energy_prefix[i + 1] = energy_prefix[i] + x[i] * x[i];
  }

  F0Contour out;
  out.hop_s = hop / fs;
  out.frame_s = frame / fs;
  out.duration_s = n / fs;
  out.f_min = cfg.f_min;
  out.f_max = cfg.f_max;
  out.f0.assign(frames, 0.0);
  out.voicing.assign(frames, 0);

  std::vector<double> ncc(lag_max + 2, 0.0);
  for (std::size_t m = 0; m < frames; ++m) {
    const std::size_t s = m * hop;
    const double e0 = energy_prefix[s + frame] - energy_prefix[s];
    if (e0 <= 0.0) continue;
    const double* a = x.data() + s;
    for (std::size_t k = lag_min - 1; k <= lag_max + 1; ++k) {
      const double ek = energy_prefix[s + k + frame] - energy_prefix[s + k];
      double c = 0.0;
      const double* b = a + k;
      for (std::size_t j = 0; j < frame; ++j) c += a[j] * b[j];
      ncc[k] = ek > 0.0 ? c / std::sqrt(e0 * ek) : 0.0;
    }

    double best = -1.0;
    for (std::size_t k = lag_min; k <= lag_max; ++k) {
      if (ncc[k] > ncc[k - 1] && ncc[k] >= ncc[k + 1]) best = std::max(best, ncc[k]);
    }
    if (best < cfg.voicing_threshold) continue;

    // Shortest-lag local maximum close to the global one; a multiple of the
    // true period correlates almost as well and would halve the estimate.
    std::size_t lag = 0;
    for (std::size_t k = lag_min; k <= lag_max; ++k) {
      if (ncc[k] > ncc[k - 1] && ncc[k] >= ncc[k + 1] && ncc[k] >= 0.9 * best) {
        lag = k;
        break;
      }
    }
    const double y0 = ncc[lag - 1], y1 = ncc[lag], y2 = ncc[lag + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    double delta = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);
    out.f0[m] = std::clamp(fs / (lag + delta), cfg.f_min, cfg.f_max);
    out.voicing[m] = 1;
  }

  // Median filter restricted to each voiced run.
  const std::size_t half = static_cast<std::size_t>(std::max(cfg.median_width, 1) / 2);
  std::vector<double> filtered = out.f0;
  std::size_t i = 0;
  while (i < frames) {
    if (!out.voicing[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < frames && out.voicing[j]) ++j;
    for (std::size_t t = i; t < j; ++t) {
      const std::size_t lo = t >= i + half ? t - half : i;
      const std::size_t hi = std::min(j, t + half + 1);
      filtered[t] = median_of({out.f0.begin() + lo, out.f0.begin() + hi});
    }
    i = j;
  }
  out.f0 = std::move(filtered);
  return out;
}

Envelope fm_envelope(const F0Contour& contour, const EnvelopeConfig& cfg,
                     const std::string& source_utterance) {
  if (contour.f0.empty() || contour.f0.size() != contour.voicing.size() ||
      contour.hop_s <= 0) {
    throw Error(Errc::kInvalidArgument, "fm_envelope: malformed contour");
  }
  const double fraction = contour.voiced_fraction();
  if (fraction < cfg.min_voiced_fraction) {
    throw Error(Errc::kInsufficientVoicing,
                "insufficient voicing (" + format_double(fraction) + " voiced) in '" +
                    source_utterance + "'");
  }
  std::vector<double> voiced;
  for (std::size_t i = 0; i < contour.f0.size(); ++i) {
    if (contour.voicing[i]) voiced.push_back(contour.f0[i]);
  }
  const double fill = median_of(voiced);
  std::vector<double> filled(contour.f0.size());
  for (std::size_t i = 0; i < filled.size(); ++i) {
    filled[i] = contour.voicing[i] ? contour.f0[i] : fill;
  }

  // Frame values sit at frame centres; hold the end values outside them.
  const double duration =
      contour.duration_s > 0
          ? contour.duration_s
          : (filled.size() - 1) * contour.hop_s + contour.frame_s;
  const auto count = static_cast<std::size_t>(std::floor(duration * cfg.rate_hz + 1e-9));
  if (count == 0) throw Error(Errc::kTooShort, "fm_envelope: contour too short");
  const double t0 = 0.5 * contour.frame_s;
  Envelope env;
  env.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double pos = (j / cfg.rate_hz - t0) / contour.hop_s;
    if (pos <= 0) {
      env.values[j] = filled.front();
    } else if (pos >= static_cast<double>(filled.size() - 1)) {
      env.values[j] = filled.back();
    } else {
      const auto k = static_cast<std::size_t>(pos);
      const double w = pos - k;
      env.values[j] = (1.0 - w) * filled[k] + w * filled[k + 1];
    }
  }
  env.rate = cfg.rate_hz;
  env.kind = EnvelopeKind::kFm;
  env.source_utterance = source_utterance;
  return env;
}

std::string envelope_to_tsv(const Envelope& env) {
  std::string out = "time_s\tvalue\n";
  for (std::size_t i = 0; i < env.values.size(); ++i) {
    out += format_double(i / env.rate);
    out += '\t';
    out += format_double(env.values[i]);
    out += '\n';
  }
  return out;
}

}  // namespace rfa
