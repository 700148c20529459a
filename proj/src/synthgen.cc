// rfa/synthgen.cc

#include "rfa/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "rfa/error.h"
#include "rfa/io_util.h"
#include "rfa/random.h"

namespace rfa {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRampS = 0.010;

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(Errc::kInvalidArgument, "invalid " + field + ": " + why);
}

void check_mods(const std::vector<ModComponent>& mods, const std::string& field) {
  double total = 0.0;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    if (!(mods[i].freq_hz > 0.0 && mods[i].freq_hz <= 10.0)) {
      bad(f + ".freq", "must lie in (0, 10] Hz");
    }
    if (!(mods[i].depth > 0.0 && mods[i].depth <= 1.0)) bad(f + ".depth", "must lie in (0, 1]");
    total += mods[i].depth;
  }
  if (total > 1.0 + 1e-12) bad(field, "depths sum to " + format_double(total) + " > 1 (overmodulation)");
}

// 1 outside gaps, 0 inside with raised-cosine ramps at the gap edges.
std::vector<double> gap_gain(const SynthSpec& spec, std::size_t n) {
  std::vector<double> g(n, 1.0);
  const double fs = spec.sample_rate;
  for (const auto& gap : spec.gaps) {
    const double a = gap.start_s, b = gap.start_s + gap.length_s;
    const double ramp = std::min(kRampS, 0.5 * gap.length_s);
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(a * fs)));
    const auto hi = std::min(n, static_cast<std::size_t>(std::ceil(b * fs)) + 1);
    for (std::size_t i = lo; i < hi; ++i) {
      const double t = i / fs;
      double w = 0.0;
      if (t < a + ramp) {
        w = 0.5 * (1.0 + std::cos(std::numbers::pi * (t - a) / ramp));
      } else if (t > b - ramp) {
        w = 0.5 * (1.0 - std::cos(std::numbers::pi * (t - (b - ramp)) / ramp));
      }
      if (t < a || t > b) w = 1.0;
      g[i] = std::min(g[i], w);
    }
  }
  return g;
}

double am_modulator(const std::vector<ModComponent>& mods, double t) {
  double m = 1.0;
  for (const auto& c : mods) m += c.depth * std::cos(kTwoPi * c.freq_hz * t + c.phase_rad);
  return m;
}

AudioClip make_clip(const SynthSpec& spec, std::vector<double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : x) v /= peak;
  }
  AudioClip clip;
  clip.samples = std::move(x);
  clip.sample_rate = spec.sample_rate;
  clip.utterance_id = spec.utterance_id;
  clip.speaker_id = spec.speaker_id;
  clip.group = spec.group;
  return clip;
}

double get_number(const nlohmann::json& j, const char* key, double fallback,
                  const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) bad(where + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<ModComponent> mods_from_json(const nlohmann::json& j, const char* key,
                                         const std::string& where) {
  std::vector<ModComponent> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  const std::string base = where + "." + key;
  if (!arr.is_array()) bad(base, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string w = base + "[" + std::to_string(i) + "]";
    if (!arr[i].is_object()) bad(w, "expected an object");
    ModComponent c;
    c.freq_hz = get_number(arr[i], "freq", 0.0, w);
    c.depth = get_number(arr[i], "depth", 0.0, w);
    c.phase_rad = get_number(arr[i], "phase", 0.0, w);
    out.push_back(c);
  }
  return out;
}

}  // namespace

const char* synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::kAm: return "AM";
    case SynthKind::kFm: return "FM";
    case SynthKind::kAmFm: return "AMFM";
    case SynthKind::kChirp: return "CHIRP";
  }
  return "?";
}

SynthKind parse_synth_kind(const std::string& name) {
  for (auto k : {SynthKind::kAm, SynthKind::kFm, SynthKind::kAmFm, SynthKind::kChirp}) {
    if (name == synth_kind_name(k)) return k;
  }
  bad("kind", "'" + name + "' is not one of AM, FM, AMFM, CHIRP");
}

void validate(const SynthSpec& spec) {
  if (spec.sample_rate < 1000) bad("sample_rate", "must be at least 1000 Hz");
  if (!(spec.duration_s >= 6.0)) bad("duration_s", "must be at least 6 s");
  check_mods(spec.am_mods, "am_mods");
  check_mods(spec.fm_mods, "fm_mods");
  for (std::size_t i = 0; i < spec.gaps.size(); ++i) {
    const auto& g = spec.gaps[i];
    if (!(g.start_s >= 0.0) || !(g.length_s > 0.0) || g.start_s + g.length_s > spec.duration_s) {
      bad("gaps[" + std::to_string(i) + "]", "must lie within the clip");
    }
  }
  switch (spec.kind) {
    case SynthKind::kAm:
    case SynthKind::kChirp:
      if (!(spec.carrier_hz > 0.0 && spec.carrier_hz < 0.5 * spec.sample_rate)) {
        bad("carrier_hz", "must lie in (0, Nyquist)");
      }
      if (spec.kind == SynthKind::kChirp) {
        if (!spec.chirp) bad("chirp", "required for CHIRP");
        const Chirp& c = *spec.chirp;
        if (!(c.f_start_hz > 0 && c.f_start_hz <= 10)) bad("chirp.f_start", "must lie in (0, 10] Hz");
        if (!(c.f_end_hz > 0 && c.f_end_hz <= 10)) bad("chirp.f_end", "must lie in (0, 10] Hz");
        double total = c.depth;
        for (const auto& m : spec.am_mods) total += m.depth;
        if (!(c.depth > 0 && c.depth <= 1)) bad("chirp.depth", "must lie in (0, 1]");
        if (total > 1.0 + 1e-12) bad("chirp.depth", "depths sum above 1 (overmodulation)");
      }
      break;
    case SynthKind::kFm:
    case SynthKind::kAmFm: {
      double excursion = 0.0;
      for (const auto& m : spec.fm_mods) excursion += m.depth * spec.f0_base_hz;
      if (spec.f0_base_hz - excursion < 60.0 || spec.f0_base_hz + excursion > 400.0) {
        bad("f0_base_hz", "f0 range leaves the tracker bounds [60, 400] Hz");
      }
      if (spec.harmonics < 1) bad("harmonics", "must be positive");
      if (spec.harmonics * (spec.f0_base_hz + excursion) >= 0.5 * spec.sample_rate) {
        bad("harmonics", "highest harmonic exceeds Nyquist");
      }
      break;
    }
  }
}

AudioClip synth_am(const SynthSpec& spec) {
  if (spec.kind != SynthKind::kAm && spec.kind != SynthKind::kChirp) {
    bad("kind", "synth_am needs AM or CHIRP");
  }
  validate(spec);
  const double fs = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(spec.duration_s * fs));
  const auto gain = gap_gain(spec, n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / fs;
    double m = am_modulator(spec.am_mods, t);
    if (spec.kind == SynthKind::kChirp) {
      const Chirp& c = *spec.chirp;
      const double sweep = (c.f_end_hz - c.f_start_hz) / spec.duration_s;
      m += c.depth * std::cos(kTwoPi * (c.f_start_hz * t + 0.5 * sweep * t * t));
    }
    x[i] = gain[i] * m * std::cos(kTwoPi * spec.carrier_hz * t);
  }
  return make_clip(spec, std::move(x));
}

AudioClip synth_fm(const SynthSpec& spec) {
  if (spec.kind != SynthKind::kFm && spec.kind != SynthKind::kAmFm) {
    bad("kind", "synth_fm needs FM or AMFM");
  }
  validate(spec);
  const double fs = spec.sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(spec.duration_s * fs));
  const auto gain = gap_gain(spec, n);
  Rng rng(mix_seed(spec.seed, 0x5f));
  std::vector<double> x(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / fs;
    double f0 = spec.f0_base_hz;
    for (const auto& c : spec.fm_mods) {
      f0 += c.depth * spec.f0_base_hz * std::sin(kTwoPi * c.freq_hz * t + c.phase_rad);
    }
    double s = 0.0;
    for (int h = 1; h <= spec.harmonics; ++h) s += std::sin(h * phase);
    s /= spec.harmonics;
    if (spec.kind == SynthKind::kAmFm) s *= am_modulator(spec.am_mods, t);
    const double noise = spec.gap_noise_level * uniform(rng, -1.0, 1.0);
    x[i] = gain[i] * s + (1.0 - gain[i]) * noise;
    phase = std::fmod(phase + kTwoPi * f0 / fs, kTwoPi);
  }
  return make_clip(spec, std::move(x));
}

AudioClip synthesize(const SynthSpec& spec) {
  switch (spec.kind) {
    case SynthKind::kAm:
    case SynthKind::kChirp:
      return synth_am(spec);
    case SynthKind::kFm:
    case SynthKind::kAmFm:
      return synth_fm(spec);
  }
  bad("kind", "unknown");
}

void validate(const CorpusSpec& spec) {
  if (spec.classes.size() != 2) bad("classes", "exactly two class templates are required");
  if (spec.classes[0].group == spec.classes[1].group) bad("classes", "group labels must differ");
  if (spec.per_class < 6) bad("per_class", "must be at least 6");
  if (spec.speakers_per_class < 1 || spec.speakers_per_class > spec.per_class) {
    bad("speakers_per_class", "must lie in [1, per_class]");
  }
  if (!(spec.jitter >= 0.0 && spec.jitter < 1.0)) bad("jitter", "must lie in [0, 1)");
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    if (spec.classes[c].group.empty()) bad("classes[" + std::to_string(c) + "].group", "empty");
    validate(spec.classes[c].templ);
  }
}

std::vector<CorpusItem> generate_corpus(const CorpusSpec& spec) {
  validate(spec);
  std::vector<CorpusItem> items;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const auto& cls = spec.classes[c];
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      Rng rng(mix_seed(spec.seed, c * 1'000'003ULL + i));
      SynthSpec s = cls.templ;
      auto jitter = [&](double v) { return v * (1.0 + uniform(rng, -spec.jitter, spec.jitter)); };
      for (auto* mods : {&s.am_mods, &s.fm_mods}) {
        double total = 0.0;
        for (auto& m : *mods) {
          m.freq_hz = std::clamp(jitter(m.freq_hz), 0.05, 10.0);
          m.depth = std::clamp(jitter(m.depth), 1e-3, 1.0);
          m.phase_rad = uniform(rng, 0.0, 2.0 * std::numbers::pi);
          total += m.depth;
        }
        // Keep the jittered modulator inside the template's depth budget.
        double budget = 0.0;
        const auto& orig = mods == &s.am_mods ? cls.templ.am_mods : cls.templ.fm_mods;
        for (const auto& m : orig) budget += m.depth;
        if (total > budget && total > 0) {
          for (auto& m : *mods) m.depth *= budget / total;
        }
      }
      if (s.chirp) {
        s.chirp->f_start_hz = std::clamp(jitter(s.chirp->f_start_hz), 0.05, 10.0);
        s.chirp->f_end_hz = std::clamp(jitter(s.chirp->f_end_hz), 0.05, 10.0);
      }
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%03zu", cls.group.c_str(), i);
      char spk[64];
      std::snprintf(spk, sizeof(spk), "%s_spk%02zu", cls.group.c_str(),
                    i % spec.speakers_per_class);
      s.utterance_id = id;
      s.speaker_id = spk;
      s.group = cls.group;
      s.seed = mix_seed(spec.seed, 0xC0FFEE + c * 1'000'003ULL + i);
      AudioClip clip = synthesize(s);
      items.push_back({std::move(s), std::move(clip)});
    }
  }
  return items;
}

DatasetManifest synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir) {
  auto items = generate_corpus(spec);
  std::filesystem::create_directories(out_dir);
  DatasetManifest manifest;
  for (const auto& item : items) {
    const auto path = out_dir / (item.clip.utterance_id + ".wav");
    write_wav(path, item.clip);
    manifest.entries.push_back(
        {path, item.clip.utterance_id, item.clip.speaker_id, item.clip.group});
    manifest.groups.insert(item.clip.group);
  }
  write_manifest(out_dir / "manifest.csv", manifest);
  return manifest;
}

SynthSpec synth_spec_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  SynthSpec s;
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) bad(where + ".kind", "expected a string");
    try {
      s.kind = parse_synth_kind(j.at("kind").get<std::string>());
    } catch (const Error& e) {
      bad(where + ".kind", e.what());
    }
  }
  s.carrier_hz = get_number(j, "carrier_hz", s.carrier_hz, where);
  s.f0_base_hz = get_number(j, "f0_base_hz", s.f0_base_hz, where);
  s.am_mods = mods_from_json(j, "am_mods", where);
  s.fm_mods = mods_from_json(j, "fm_mods", where);
  if (j.contains("chirp")) {
    const auto& c = j.at("chirp");
    Chirp ch;
    ch.f_start_hz = get_number(c, "f_start", ch.f_start_hz, where + ".chirp");
    ch.f_end_hz = get_number(c, "f_end", ch.f_end_hz, where + ".chirp");
    ch.depth = get_number(c, "depth", ch.depth, where + ".chirp");
    s.chirp = ch;
  }
  s.duration_s = get_number(j, "duration_s", s.duration_s, where);
  s.sample_rate = static_cast<int>(get_number(j, "sample_rate", s.sample_rate, where));
  s.harmonics = static_cast<int>(get_number(j, "harmonics", s.harmonics, where));
  s.gap_noise_level = get_number(j, "gap_noise_level", s.gap_noise_level, where);
  if (j.contains("gaps")) {
    for (const auto& g : j.at("gaps")) {
      s.gaps.push_back({get_number(g, "start_s", 0.0, where + ".gaps"),
                        get_number(g, "length_s", 0.0, where + ".gaps")});
    }
  }
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  // Field-level checks with the caller's path in the message.
  try {
    validate(s);
  } catch (const Error& e) {
    throw Error(Errc::kInvalidArgument, where + ": " + e.what());
  }
  return s;
}

CorpusSpec corpus_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("spec", "expected a JSON object");
  CorpusSpec spec;
  spec.per_class = static_cast<std::size_t>(get_number(j, "per_class", spec.per_class, "spec"));
  spec.speakers_per_class = static_cast<std::size_t>(
      get_number(j, "speakers_per_class", spec.speakers_per_class, "spec"));
  spec.jitter = get_number(j, "jitter", spec.jitter, "spec");
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (!j.contains("classes") || !j.at("classes").is_array()) bad("classes", "expected an array");
  const auto& classes = j.at("classes");
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const std::string where = "classes[" + std::to_string(c) + "]";
    CorpusClass cls;
    if (!classes[c].contains("group") || !classes[c].at("group").is_string()) {
      bad(where + ".group", "expected a string");
    }
    cls.group = classes[c].at("group").get<std::string>();
    cls.templ = synth_spec_from_json(classes[c], where);
    spec.classes.push_back(std::move(cls));
  }
  validate(spec);
  return spec;
}

nlohmann::ordered_json synth_spec_to_json(const SynthSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = synth_kind_name(s.kind);
  j["carrier_hz"] = s.carrier_hz;
  j["f0_base_hz"] = s.f0_base_hz;
  auto mods = [](const std::vector<ModComponent>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& m : v) a.push_back({{"freq", m.freq_hz}, {"depth", m.depth}, {"phase", m.phase_rad}});
    return a;
  };
  j["am_mods"] = mods(s.am_mods);
  j["fm_mods"] = mods(s.fm_mods);
  if (s.chirp) {
    j["chirp"] = {{"f_start", s.chirp->f_start_hz}, {"f_end", s.chirp->f_end_hz},
                  {"depth", s.chirp->depth}};
  }
  j["duration_s"] = s.duration_s;
  j["sample_rate"] = s.sample_rate;
  j["harmonics"] = s.harmonics;
  j["gap_noise_level"] = s.gap_noise_level;
  nlohmann::ordered_json gaps = nlohmann::ordered_json::array();
  for (const auto& g : s.gaps) gaps.push_back({{"start_s", g.start_s}, {"length_s", g.length_s}});
  j["gaps"] = gaps;
  j["seed"] = s.seed;
  return j;
}

}  // namespace rfa
