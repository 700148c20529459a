// rfa/features.h
//
// Fixed-length utterance descriptors: rhythm-formant track variances,
// low-order 2D-DCT coefficients of the log LF spectrogram, and an MFCC
// baseline pooled over voice-active frames.

#ifndef RFA_FEATURES_H_
#define RFA_FEATURES_H_

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rfa/audio_io.h"
#include "rfa/envelopes.h"
#include "rfa/matrix.h"
#include "rfa/rhythm_spectra.h"

namespace rfa {

// Population variance (Hz^2) of the valid entries of each rank's track;
// nullopt for a rank with fewer than two valid frames.
std::array<std::optional<double>, kRFormantCount> variance_features(
    const RFormantTracks& tracks);

// Orthonormal 2D DCT-II:
//   C(k,l) = 2 w(k) w(l) / sqrt(NM) * sum_a sum_b R(b,a)
//            cos(pi l (2a+1) / 2M) cos(pi k (2b+1) / 2N)
// with w(0) = 1/sqrt(2), w(>0) = 1. Rows of R index b (N), columns a (M).
Matrix dct2(const Matrix& r);

// log(mags + eps) -> dct2 -> {C(0,0), C(0,1), C(1,0), C(1,1)}.
std::array<double, 4> dct2_features(const LfSpectrogram& spec, double eps = 1e-6);

struct VadConfig {
  double frame_s = 0.020;
  double hop_s = 0.010;
  double threshold = 0.1;  // relative to the median frame energy
};

// Frame energy = mean square. A frame is active iff its energy is positive
// and at least threshold * median energy.
std::vector<char> energy_vad(const AudioClip& clip, const VadConfig& cfg = {});

struct MfccConfig {
  double frame_s = 0.020;
  double hop_s = 0.010;
  int num_filters = 26;
  int num_ceps = 13;
  int delta_window = 2;
  double log_floor = 1e-10;
};

inline constexpr std::size_t kMfccFrameDim = 39;
inline constexpr std::size_t kMfccPooledDim = 78;

// Per-frame 39-dim MFCC+delta+delta-delta vectors for every frame.
std::vector<std::array<double, kMfccFrameDim>> mfcc_frames(const AudioClip& clip,
                                                           const MfccConfig& cfg = {});

// Mean and population std of the per-frame vectors over VAD-active frames.
// Throws kTooShort with fewer than three active frames.
std::array<double, kMfccPooledDim> mfcc_features(const AudioClip& clip,
                                                 const MfccConfig& cfg = {},
                                                 const VadConfig& vad = {});

enum class FeatureFamily { kVarianceAm, kVarianceFm, kDctAm, kDctFm, kMfcc };

// "var-am", "var-fm", "dct-am", "dct-fm", "mfcc".
const char* family_name(FeatureFamily f);
FeatureFamily parse_family(const std::string& name);
std::vector<FeatureFamily> parse_families(const std::string& csv_list);
std::vector<std::string> family_feature_names(FeatureFamily f);

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;  // NaN marks a missing value
  std::string utterance_id;
  std::string speaker_id;
  std::string group;
};

struct FeatureConfig {
  EnvelopeConfig envelope;
  F0Config f0;
  SpectrumConfig spectrum;
  double window_s = 3.0;
  std::size_t frames = 50;
  double eps = 1e-6;
  VadConfig vad;
  MfccConfig mfcc;
};

struct FeatureResult {
  FeatureVector vector;
  std::vector<std::string> warnings;
};

// Runs the full pipeline for one clip (peak-normalized internally).
// Families appear in the order given. Hard failures (e.g. insufficient
// voicing for an FM family) throw; missing variances become NaN plus a
// warning.
FeatureResult extract_features(const AudioClip& clip,
                               std::span<const FeatureFamily> families,
                               const FeatureConfig& cfg = {});

// Same, for several LF window lengths (cfg.window_s is ignored); the
// envelopes, F0 track and MFCCs are computed once.
std::vector<FeatureResult> extract_features(const AudioClip& clip,
                                            std::span<const FeatureFamily> families,
                                            const FeatureConfig& cfg,
                                            std::span<const double> windows);

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<FeatureVector> rows;
};

std::string feature_table_to_csv(const FeatureTable& table);
std::string feature_table_to_json(const FeatureTable& table);
FeatureTable parse_feature_csv(const std::string& text);
FeatureTable load_feature_csv(const std::filesystem::path& path);

}  // namespace rfa

#endif  // RFA_FEATURES_H_
