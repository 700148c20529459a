// rfa/rhythm_spectra.h
//
// Low-frequency (0-10 Hz) spectra of modulation envelopes, their sliding
// window spectrograms, and the rhythm-formant tracks: per frame, the
// frequencies of the highest-magnitude spectral peaks ranked by magnitude.

#ifndef RFA_RHYTHM_SPECTRA_H_
#define RFA_RHYTHM_SPECTRA_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rfa/envelopes.h"
#include "rfa/matrix.h"

namespace rfa {

struct SpectrumConfig {
  double max_freq_hz = 10.0;
  int pad_factor = 4;
};

struct LfSpectrum {
  std::vector<double> freqs;  // strictly increasing, in (0, max_freq_hz]
  std::vector<double> mags;   // max == 1
  double resolution = 0.0;    // Hz per bin
};

struct LfSpectrogram {
  Matrix mags;                      // N bins x M frames
  std::vector<double> freqs;        // per row
  std::vector<double> frame_times;  // window centres, seconds
  double window_s = 0.0;
  double resolution = 0.0;
  EnvelopeKind kind = EnvelopeKind::kAm;

  std::size_t bins() const { return mags.rows(); }
  std::size_t frames() const { return mags.cols(); }
};

struct SpectralPeak {
  std::size_t bin = 0;
  double freq = 0.0;
  double mag = 0.0;
};

inline constexpr std::size_t kRFormantCount = 6;

struct RFormantTracks {
  Matrix freqs;             // ranks x frames, 0 where padded
  Matrix mags;              // ranks x frames, 0 where padded
  std::vector<char> valid;  // ranks x frames, row-major

  std::size_t ranks() const { return freqs.rows(); }
  std::size_t frames() const { return freqs.cols(); }
  bool is_valid(std::size_t rank, std::size_t frame) const {
    return valid[rank * frames() + frame] != 0;
  }
};

// Magnitude spectrum of env[start_s, start_s + window_s): mean removed,
// zero padded to pad_factor x the window length, restricted to
// 0 < f <= max_freq_hz and scaled so the largest bin is 1.
// Throws kFlatWindow for a constant window and kOutOfRange when the window
// leaves the envelope.
LfSpectrum lf_spectrum(const Envelope& env, double start_s, double window_s,
                       const SpectrumConfig& cfg = {});

// `frames` windows whose starts are evenly spaced from 0 to T - window_s.
LfSpectrogram lf_spectrogram(const Envelope& env, double window_s,
                             std::size_t frames = 50, const SpectrumConfig& cfg = {});

// Local maxima (strictly above the left neighbour and above the first
// differing right neighbour, so a plateau reports its leftmost bin; the
// end bins never qualify), sorted by magnitude descending with ties going
// to the lower frequency. At most k are returned.
std::vector<SpectralPeak> pick_peaks(std::span<const double> freqs,
                                     std::span<const double> mags, std::size_t k);

inline std::vector<SpectralPeak> pick_peaks(const LfSpectrum& s, std::size_t k) {
  return pick_peaks(s.freqs, s.mags, k);
}

RFormantTracks rformant_tracks(const LfSpectrogram& spec,
                               std::size_t ranks = kRFormantCount);

// (N+1) x (M+1) TSV: header row of frame times, first column of bin
// frequencies.
std::string spectrogram_to_tsv(const LfSpectrogram& spec);

// frame,rank,freq_hz,mag,valid (rank is 1-based).
std::string tracks_to_csv(const RFormantTracks& tracks);

}  // namespace rfa

#endif  // RFA_RHYTHM_SPECTRA_H_
