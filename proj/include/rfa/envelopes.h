// rfa/envelopes.h
//
// Amplitude- and frequency-modulation envelopes of a speech clip, sampled at
// a low rate suitable for 0-10 Hz rhythm analysis.

#ifndef RFA_ENVELOPES_H_
#define RFA_ENVELOPES_H_

#include <span>
#include <string>
#include <vector>

#include "rfa/audio_io.h"

namespace rfa {

enum class EnvelopeKind { kAm, kFm };

const char* envelope_kind_name(EnvelopeKind kind);  // "AM" / "FM"

struct Envelope {
  std::vector<double> values;
  double rate = 0.0;  // Hz
  EnvelopeKind kind = EnvelopeKind::kAm;
  std::string source_utterance;

  double duration_s() const { return rate > 0 ? values.size() / rate : 0.0; }
};

struct EnvelopeConfig {
  double rate_hz = 100.0;      // output envelope rate
  double smoothing_s = 0.050;  // moving-average window applied to the AM magnitude
  double min_voiced_fraction = 0.10;
};

struct F0Config {
  double frame_s = 0.040;
  double hop_s = 0.010;
  double f_min = 60.0;
  double f_max = 400.0;
  double voicing_threshold = 0.3;
  int median_width = 5;
};

struct F0Contour {
  std::vector<double> f0;     // Hz, 0 where unvoiced
  std::vector<char> voicing;  // 1 where voiced
  double hop_s = 0.0;
  double frame_s = 0.0;
  double duration_s = 0.0;  // duration of the analysed clip
  double f_min = 0.0;
  double f_max = 0.0;

  double voiced_fraction() const;
};

// |x + i H(x)| via the FFT analytic-signal construction. Same length as
// the input; throws kEmptyInput on empty input.
std::vector<double> analytic_magnitude(std::span<const double> samples);

// Centered moving average; windows are truncated (not zero padded) at the
// edges so the output keeps the input's length and positivity.
std::vector<double> moving_average(std::span<const double> x, std::size_t width);

// Averages contiguous blocks of in_rate/out_rate input samples. Output
// length is floor(n * out_rate / in_rate); a trailing partial block is
// dropped.
std::vector<double> block_decimate(std::span<const double> x, double in_rate,
                                   double out_rate);

Envelope am_envelope(const AudioClip& clip, const EnvelopeConfig& cfg = {});

// Normalized cross-correlation pitch tracker with a voicing threshold and
// a median filter over voiced runs.
F0Contour track_f0(const AudioClip& clip, const F0Config& cfg = {});

// Fills unvoiced frames with the median voiced F0 and resamples the
// contour to cfg.rate_hz. Throws kInsufficientVoicing when fewer than
// cfg.min_voiced_fraction of the frames are voiced.
Envelope fm_envelope(const F0Contour& contour, const EnvelopeConfig& cfg = {},
                     const std::string& source_utterance = {});

// "time_s\tvalue" rows.
std::string envelope_to_tsv(const Envelope& env);

}  // namespace rfa

#endif  // RFA_ENVELOPES_H_
