// rfa/features.cc

#include "rfa/features.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "rfa/error.h"
#include "rfa/io_util.h"

namespace rfa {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// cos(pi * k * (2i + 1) / 2n), k rows, i columns.
Matrix cosine_table(std::size_t n) {
  Matrix t(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      t(k, i) = std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
    }
  }
  return t;
}

double parse_value(const std::string& s) {
  const std::string v = trim(s);
  if (v.empty() || v == "NA" || v == "nan" || v == "NaN") return kNaN;
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(Errc::kInvalidArgument, "feature csv: bad number '" + v + "'");
  }
}

}  // namespace

std::array<std::optional<double>, kRFormantCount> variance_features(
    const RFormantTracks& tracks) {
  std::array<std::optional<double>, kRFormantCount> out{};
  const std::size_t ranks = std::min(tracks.ranks(), kRFormantCount);
  for (std::size_t r = 0; r < ranks; ++r) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < tracks.frames(); ++m) {
      if (tracks.is_valid(r, m)) {
        sum += tracks.freqs(r, m);
        ++count;
      }
    }
    if (count < 2) continue;
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t m = 0; m < tracks.frames(); ++m) {
      if (tracks.is_valid(r, m)) {
        const double d = tracks.freqs(r, m) - mean;
        ss += d * d;
      }
    }
    out[r] = ss / count;
  }
  return out;
}

Matrix dct2(const Matrix& r) {
  const std::size_t n = r.rows(), m = r.cols();
  if (n == 0 || m == 0) throw Error(Errc::kEmptyInput, "dct2: empty matrix");
  const Matrix cos_n = cosine_table(n);
  const Matrix cos_m = cosine_table(m);

  // Transform along the time axis (columns a), then along frequency (rows b).
  Matrix partial(n, m);
  for (std::size_t b = 0; b < n; ++b) {
    auto row = r.row(b);
    for (std::size_t l = 0; l < m; ++l) {
      double s = 0.0;
      auto basis = cos_m.row(l);
      for (std::size_t a = 0; a < m; ++a) s += row[a] * basis[a];
      partial(b, l) = s;
    }
  }
  Matrix c(n, m);
  const double norm = 2.0 / std::sqrt(static_cast<double>(n) * static_cast<double>(m));
  for (std::size_t k = 0; k < n; ++k) {
    const double wk = k == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
    for (std::size_t l = 0; l < m; ++l) {
      const double wl = l == 0 ? std::numbers::sqrt2 / 2.0 : 1.0;
      double s = 0.0;
      for (std::size_t b = 0; b < n; ++b) s += cos_n(k, b) * partial(b, l);
      c(k, l) = norm * wk * wl * s;
    }
  }
  return c;
}

std::array<double, 4> dct2_features(const LfSpectrogram& spec, double eps) {
  Matrix logged = spec.mags;
  for (double& v : logged.data()) v = std::log(v + eps);
  const Matrix c = dct2(logged);
  const double c01 = c.cols() > 1 ? c(0, 1) : 0.0;
  const double c10 = c.rows() > 1 ? c(1, 0) : 0.0;
  const double c11 = c.rows() > 1 && c.cols() > 1 ? c(1, 1) : 0.0;
  return {c(0, 0), c01, c10, c11};
}

std::vector<char> energy_vad(const AudioClip& clip, const VadConfig& cfg) {
  const auto frame = static_cast<std::size_t>(std::lround(cfg.frame_s * clip.sample_rate));
  const auto hop = static_cast<std::size_t>(std::lround(cfg.hop_s * clip.sample_rate));
  if (frame == 0 || hop == 0) throw Error(Errc::kInvalidArgument, "energy_vad: bad framing");
  if (clip.samples.size() < frame) {
    throw Error(Errc::kTooShort, "energy_vad: clip shorter than one frame");
  }
  const std::size_t frames = (clip.samples.size() - frame) / hop + 1;
  std::vector<double> energy(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double s = 0.0;
    for (std::size_t i = 0; i < frame; ++i) {
      const double x = clip.samples[f * hop + i];
      s += x * x;
    }
    energy[f] = s / frame;
  }
  std::vector<double> sorted = energy;
  std::sort(sorted.begin(), sorted.end());
  const double median = frames % 2 == 1
                            ? sorted[frames / 2]
                            : 0.5 * (sorted[frames / 2 - 1] + sorted[frames / 2]);
  std::vector<char> active(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    active[f] = energy[f] > 0.0 && energy[f] >= cfg.threshold * median;
  }
  return active;
}

const char* family_name(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::kVarianceAm: return "var-am";
    case FeatureFamily::kVarianceFm: return "var-fm";
    case FeatureFamily::kDctAm: return "dct-am";
    case FeatureFamily::kDctFm: return "dct-fm";
    case FeatureFamily::kMfcc: return "mfcc";
  }
  return "?";
}

FeatureFamily parse_family(const std::string& name) {
  for (auto f : {FeatureFamily::kVarianceAm, FeatureFamily::kVarianceFm,
                 FeatureFamily::kDctAm, FeatureFamily::kDctFm, FeatureFamily::kMfcc}) {
    if (name == family_name(f)) return f;
  }
  throw Error(Errc::kInvalidArgument, "unknown feature family '" + name +
                                          "' (expected var-am, var-fm, dct-am, dct-fm, mfcc)");
}

std::vector<FeatureFamily> parse_families(const std::string& csv_list) {
  std::vector<FeatureFamily> out;
  for (const auto& part : split_csv_line(csv_list)) {
    const std::string name = trim(part);
    if (name.empty()) continue;
    if (name == "all") {
      for (auto f : {FeatureFamily::kVarianceAm, FeatureFamily::kVarianceFm,
                     FeatureFamily::kDctAm, FeatureFamily::kDctFm, FeatureFamily::kMfcc}) {
        if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
      }
      continue;
    }
    auto f = parse_family(name);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  if (out.empty()) throw Error(Errc::kInvalidArgument, "no feature families selected");
  return out;
}

std::vector<std::string> family_feature_names(FeatureFamily f) {
  std::vector<std::string> names;
  switch (f) {
    case FeatureFamily::kVarianceAm:
    case FeatureFamily::kVarianceFm: {
      const char* kind = f == FeatureFamily::kVarianceAm ? "AM" : "FM";
      for (std::size_t i = 1; i <= kRFormantCount; ++i) {
        names.push_back("Var-RF" + std::to_string(i) + "-" + kind);
      }
      break;
    }
    case FeatureFamily::kDctAm:
    case FeatureFamily::kDctFm: {
      const char* kind = f == FeatureFamily::kDctAm ? "AM" : "FM";
      for (int i = 1; i <= 4; ++i) names.push_back("2D-DCT" + std::to_string(i) + "-" + kind);
      break;
    }
    case FeatureFamily::kMfcc:
      for (std::size_t i = 1; i <= kMfccPooledDim; ++i) {
        names.push_back("MFCC-" + std::to_string(i));
      }
      break;
  }
  return names;
}

std::vector<FeatureResult> extract_features(const AudioClip& raw,
                                            std::span<const FeatureFamily> families,
                                            const FeatureConfig& cfg,
                                            std::span<const double> windows) {
  const AudioClip clip = peak_normalize(raw);
  auto wants = [&](FeatureFamily a, FeatureFamily b) {
    return std::find(families.begin(), families.end(), a) != families.end() ||
           std::find(families.begin(), families.end(), b) != families.end();
  };

  // Window-independent stages run once.
  std::optional<Envelope> am_env, fm_env;
  if (wants(FeatureFamily::kVarianceAm, FeatureFamily::kDctAm)) {
    am_env = am_envelope(clip, cfg.envelope);
  }
  if (wants(FeatureFamily::kVarianceFm, FeatureFamily::kDctFm)) {
    fm_env = fm_envelope(track_f0(clip, cfg.f0), cfg.envelope, clip.utterance_id);
  }
  std::optional<std::array<double, kMfccPooledDim>> mfcc;
  if (wants(FeatureFamily::kMfcc, FeatureFamily::kMfcc)) {
    mfcc = mfcc_features(clip, cfg.mfcc, cfg.vad);
  }

  std::vector<FeatureResult> results;
  for (double window_s : windows) {
    FeatureResult result;
    FeatureVector& fv = result.vector;
    fv.utterance_id = clip.utterance_id;
    fv.speaker_id = clip.speaker_id;
    fv.group = clip.group;

    std::optional<LfSpectrogram> am_spec, fm_spec;
    if (am_env) am_spec = lf_spectrogram(*am_env, window_s, cfg.frames, cfg.spectrum);
    if (fm_env) fm_spec = lf_spectrogram(*fm_env, window_s, cfg.frames, cfg.spectrum);

    for (FeatureFamily f : families) {
      auto names = family_feature_names(f);
      fv.names.insert(fv.names.end(), names.begin(), names.end());
      switch (f) {
        case FeatureFamily::kVarianceAm:
        case FeatureFamily::kVarianceFm: {
          const auto& spec = f == FeatureFamily::kVarianceAm ? *am_spec : *fm_spec;
          auto vars = variance_features(rformant_tracks(spec));
          for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i]) {
              fv.values.push_back(*vars[i]);
            } else {
              fv.values.push_back(kNaN);
              result.warnings.push_back(clip.utterance_id + ": " + names[i] +
                                        " missing (fewer than 2 valid frames)");
            }
          }
          break;
        }
        case FeatureFamily::kDctAm:
        case FeatureFamily::kDctFm: {
          const auto& spec = f == FeatureFamily::kDctAm ? *am_spec : *fm_spec;
          auto c = dct2_features(spec, cfg.eps);
          fv.values.insert(fv.values.end(), c.begin(), c.end());
          break;
        }
        case FeatureFamily::kMfcc:
          fv.values.insert(fv.values.end(), mfcc->begin(), mfcc->end());
          break;
      }
    }
    results.push_back(std::move(result));
  }
  return results;
}

FeatureResult extract_features(const AudioClip& clip, std::span<const FeatureFamily> families,
                               const FeatureConfig& cfg) {
  const double window[] = {cfg.window_s};
  return std::move(extract_features(clip, families, cfg, window).front());
}

std::string feature_table_to_csv(const FeatureTable& table) {
  std::string out = "utterance_id,speaker_id,group";
  for (const auto& n : table.names) out += "," + csv_escape(n);
  out += '\n';
  for (const auto& row : table.rows) {
    out += csv_escape(row.utterance_id) + "," + csv_escape(row.speaker_id) + "," +
           csv_escape(row.group);
    for (double v : row.values) out += "," + (std::isnan(v) ? std::string("NA") : format_double(v));
    out += '\n';
  }
  return out;
}

std::string feature_table_to_json(const FeatureTable& table) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r;
    r["utterance_id"] = row.utterance_id;
    r["speaker_id"] = row.speaker_id;
    r["group"] = row.group;
    for (std::size_t i = 0; i < table.names.size(); ++i) {
      const double v = row.values[i];
      if (std::isnan(v)) {
        r[table.names[i]] = nullptr;
      } else {
        r[table.names[i]] = v;
      }
    }
    rows.push_back(std::move(r));
  }
  nlohmann::ordered_json doc;
  doc["feature_names"] = table.names;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

FeatureTable parse_feature_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw Error(Errc::kEmptyInput, "feature csv: empty file");
  }
  auto header = split_csv_line(line);
  const char* fixed[] = {"utterance_id", "speaker_id", "group"};
  if (header.size() < 3) throw Error(Errc::kMissingColumn, "feature csv: short header");
  for (int i = 0; i < 3; ++i) {
    if (trim(header[i]) != fixed[i]) {
      throw Error(Errc::kMissingColumn,
                  std::string("feature csv: expected column '") + fixed[i] + "'");
    }
  }
  FeatureTable table;
  for (std::size_t i = 3; i < header.size(); ++i) table.names.push_back(trim(header[i]));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(Errc::kDimensionMismatch, "feature csv: row width differs from header");
    }
    FeatureVector fv;
    fv.utterance_id = trim(fields[0]);
    fv.speaker_id = trim(fields[1]);
    fv.group = trim(fields[2]);
    fv.names = table.names;
    for (std::size_t i = 3; i < fields.size(); ++i) fv.values.push_back(parse_value(fields[i]));
    table.rows.push_back(std::move(fv));
  }
  return table;
}

FeatureTable load_feature_csv(const std::filesystem::path& path) {
  return parse_feature_csv(read_file(path));
}

}  // namespace rfa
