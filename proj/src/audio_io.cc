// rfa/audio_io.cc

#include "rfa/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <string_view>

#include "rfa/error.h"
#include "rfa/io_util.h"

namespace rfa {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::kFileNotFound, "wav: file not found: " + path.string());
  }
  const std::string bytes = read_file(path);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  const std::string where = "wav: " + path.string() + ": ";

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw Error(Errc::kMalformedHeader, where + "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t len = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16 || body + len > size) {
        throw Error(Errc::kMalformedHeader, where + "truncated fmt chunk");
      }
      format = read_u16(data + body);
      channels = read_u16(data + body + 2);
      rate = read_u32(data + body + 4);
      bits = read_u16(data + body + 14);
      if (format == kFormatExtensible) {
        // The sub-format GUID starts with the real format tag.
        if (len < 40) throw Error(Errc::kMalformedHeader, where + "truncated extensible fmt");
        format = read_u16(data + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(Errc::kMalformedHeader, where + "data chunk before fmt");
      pcm = data + body;
      // Some writers leave the data length unset (streaming); clamp to file.
      pcm_bytes = std::min<std::size_t>(len, size - body);
      break;
    }
    pos = body + len + (len & 1);
  }

  if (!have_fmt) throw Error(Errc::kMalformedHeader, where + "missing fmt chunk");
  if (pcm == nullptr) throw Error(Errc::kMalformedHeader, where + "missing data chunk");
  if (format != kFormatPcm) {
    throw Error(Errc::kUnsupportedFormat,
                where + "unsupported codec (format tag " + std::to_string(format) + ")");
  }
  if (bits != 16) {
    throw Error(Errc::kUnsupportedFormat,
                where + "unsupported bit depth " + std::to_string(bits));
  }
  if (channels != 1 && channels != 2) {
    throw Error(Errc::kUnsupportedFormat,
                where + "unsupported channel count " + std::to_string(channels));
  }
  if (rate == 0) throw Error(Errc::kMalformedHeader, where + "zero sample rate");

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = pcm_bytes / frame_bytes;
  if (frames == 0) throw Error(Errc::kMalformedHeader, where + "no samples");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.utterance_id = path.stem().string();
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* f = pcm + i * frame_bytes;
    if (channels == 1) {
      clip.samples[i] = static_cast<std::int16_t>(read_u16(f)) / 32768.0;
    } else {
      const int l = static_cast<std::int16_t>(read_u16(f));
      const int r = static_cast<std::int16_t>(read_u16(f + 2));
      clip.samples[i] = (l + r) / 2.0 / 32768.0;
    }
  }
  return clip;
}

std::string encode_wav(const std::vector<double>& samples, int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double x : samples) {
    double q = std::round(x * 32768.0);
    q = std::clamp(q, -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw Error(Errc::kInvalidArgument, "wav: bad sample rate");
  write_file_atomic(path, encode_wav(clip.samples, clip.sample_rate));
}

AudioClip peak_normalize(const AudioClip& clip) {
  double peak = 0.0;
  for (double x : clip.samples) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) {
    throw Error(Errc::kSilentClip, "silent clip: " + clip.utterance_id);
  }
  AudioClip out = clip;
  for (double& x : out.samples) x /= peak;
  return out;
}

std::size_t DatasetManifest::speaker_count() const {
  std::set<std::string> speakers;
  for (const auto& e : entries) speakers.insert(e.speaker_id);
  return speakers.size();
}

std::map<std::string, std::size_t> DatasetManifest::utterances_per_group() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : entries) ++counts[e.group];
  return counts;
}

DatasetManifest parse_manifest(const std::string& text,
                               const std::filesystem::path& base_dir) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(Errc::kEmptyInput, "manifest: empty file");
  if (header.front().starts_with("\xEF\xBB\xBF")) header.front().erase(0, 3);

  const char* required[] = {"path", "utterance_id", "speaker_id", "group"};
  int col[4];
  for (int k = 0; k < 4; ++k) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return trim(h) == required[k]; });
    if (it == header.end()) {
      throw Error(Errc::kMissingColumn,
                  std::string("manifest: missing column '") + required[k] + "'");
    }
    col[k] = static_cast<int>(it - header.begin());
  }

  DatasetManifest m;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw Error(Errc::kMissingColumn,
                  "manifest: line " + std::to_string(line_no) + " has too few fields");
    }
    ManifestEntry e;
    std::filesystem::path p = trim(fields[col[0]]);
    e.path = p.is_absolute() ? p : base_dir / p;
    e.utterance_id = trim(fields[col[1]]);
    e.speaker_id = trim(fields[col[2]]);
    e.group = trim(fields[col[3]]);
    if (e.utterance_id.empty() || e.speaker_id.empty() || e.group.empty()) {
      throw Error(Errc::kMissingColumn,
                  "manifest: line " + std::to_string(line_no) + " has an empty field");
    }
    if (!seen.insert(e.utterance_id).second) {
      throw Error(Errc::kDuplicateId, "manifest: duplicate utterance_id '" +
                                          e.utterance_id + "' at line " +
                                          std::to_string(line_no));
    }
    m.groups.insert(e.group);
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw Error(Errc::kEmptyInput, "manifest: no data rows");
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::kFileNotFound, "manifest: file not found: " + path.string());
  }
  return parse_manifest(read_file(path), path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  const auto base = path.parent_path();
  std::string out = "path,utterance_id,speaker_id,group\n";
  for (const auto& e : manifest.entries) {
    std::filesystem::path p = e.path;
    if (!base.empty() && p.is_absolute() == base.is_absolute()) {
      auto rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    out += csv_escape(p.generic_string()) + "," + csv_escape(e.utterance_id) + "," +
           csv_escape(e.speaker_id) + "," + csv_escape(e.group) + "\n";
  }
  write_file_atomic(path, out);
}

AudioClip load_entry(const ManifestEntry& entry) {
  AudioClip clip = load_wav(entry.path);
  clip.utterance_id = entry.utterance_id;
  clip.speaker_id = entry.speaker_id;
  clip.group = entry.group;
  return clip;
}

}  // namespace rfa
