// rfa/audio_io.h
//
// PCM16 WAV ingestion and dataset manifests.

#ifndef RFA_AUDIO_IO_H_
#define RFA_AUDIO_IO_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace rfa {

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string utterance_id;
  std::string speaker_id;
  std::string group;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file holding 16-bit integer PCM, mono or stereo.
// Samples are scaled by 1/32768; stereo is averaged per frame. The
// utterance id defaults to the file stem.
// Throws Error with kFileNotFound, kMalformedHeader or kUnsupportedFormat.
AudioClip load_wav(const std::filesystem::path& path);

// Writes a mono PCM16 WAV (round(x * 32768), clamped to the int16 range).
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

// Encodes a mono PCM16 WAV image in memory.
std::string encode_wav(const std::vector<double>& samples, int sample_rate);

// Divides by max |x|. Throws kSilentClip for an all-zero signal.
AudioClip peak_normalize(const AudioClip& clip);

struct ManifestEntry {
  std::filesystem::path path;  // absolute or resolved against the manifest dir
  std::string utterance_id;
  std::string speaker_id;
  std::string group;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::set<std::string> groups;

  std::size_t speaker_count() const;
  std::map<std::string, std::size_t> utterances_per_group() const;
};

// CSV with a header containing path,utterance_id,speaker_id,group (any
// column order, extra columns ignored). Relative paths are resolved against
// the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

DatasetManifest parse_manifest(const std::string& text,
                               const std::filesystem::path& base_dir);

// Writes entries with paths relative to the manifest directory when they
// live beneath it.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

AudioClip load_entry(const ManifestEntry& entry);

}  // namespace rfa

#endif  // RFA_AUDIO_IO_H_
