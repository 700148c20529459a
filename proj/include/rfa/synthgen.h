// rfa/synthgen.h
//
// Synthetic clips with known modulation structure, used as ground truth
// for the analysis pipeline and as a stand-in corpus for classification.

#ifndef RFA_SYNTHGEN_H_
#define RFA_SYNTHGEN_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfa/audio_io.h"

namespace rfa {

enum class SynthKind { kAm, kFm, kAmFm, kChirp };

const char* synth_kind_name(SynthKind kind);
SynthKind parse_synth_kind(const std::string& name);

struct ModComponent {
  double freq_hz = 0.0;  // (0, 10]
  double depth = 0.0;    // (0, 1]
  double phase_rad = 0.0;
};

struct Chirp {
  double f_start_hz = 2.0;
  double f_end_hz = 6.0;
  double depth = 0.5;
};

struct Gap {
  double start_s = 0.0;
  double length_s = 0.0;
};

struct SynthSpec {
  SynthKind kind = SynthKind::kAm;
  double carrier_hz = 220.0;  // AM / CHIRP carrier
  double f0_base_hz = 150.0;  // FM / AMFM fundamental
  std::vector<ModComponent> am_mods;  // amplitude modulator (AM, AMFM)
  std::vector<ModComponent> fm_mods;  // f0 modulator; excursion = depth * f0_base
  std::optional<Chirp> chirp;         // CHIRP only
  double duration_s = 12.0;
  int sample_rate = 16000;
  std::vector<Gap> gaps;
  int harmonics = 10;
  double gap_noise_level = 1e-3;  // FM gaps: noise amplitude relative to peak
  std::uint64_t seed = 0;
  std::string utterance_id = "synth";
  std::string speaker_id = "synth";
  std::string group = "synth";
};

// Throws kInvalidArgument naming the offending field.
void validate(const SynthSpec& spec);

// s(t) = [1 + sum d_j cos(2 pi f_j t + phi_j)] cos(2 pi f_c t), peak
// normalized. CHIRP sweeps the modulation frequency linearly from f_start
// to f_end over the clip. Gaps are silenced with 10 ms raised-cosine
// ramps inside the gap.
AudioClip synth_am(const SynthSpec& spec);

// Equal-amplitude sum of the first `harmonics` harmonics of
// f0(t) = f0_base + sum d_j f0_base sin(2 pi f_j t + phi_j). AMFM also
// applies the am_mods envelope. Gaps hold low-level seeded noise.
AudioClip synth_fm(const SynthSpec& spec);

// Dispatches on spec.kind.
AudioClip synthesize(const SynthSpec& spec);

struct CorpusClass {
  std::string group;
  SynthSpec templ;
};

struct CorpusSpec {
  std::vector<CorpusClass> classes;
  std::size_t per_class = 30;
  std::size_t speakers_per_class = 6;
  double jitter = 0.05;  // relative, uniform in [-jitter, +jitter]
  std::uint64_t seed = 0;
};

void validate(const CorpusSpec& spec);

struct CorpusItem {
  SynthSpec spec;
  AudioClip clip;
};

// Generates every clip in memory (pure function of the spec).
std::vector<CorpusItem> generate_corpus(const CorpusSpec& spec);

// Writes <out_dir>/<utterance_id>.wav for every clip plus
// <out_dir>/manifest.csv and returns the manifest.
DatasetManifest synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir);

SynthSpec synth_spec_from_json(const nlohmann::json& j, const std::string& where = "spec");
CorpusSpec corpus_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json synth_spec_to_json(const SynthSpec& spec);

}  // namespace rfa

#endif  // RFA_SYNTHGEN_H_
