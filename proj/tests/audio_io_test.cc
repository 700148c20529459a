// tests/audio_io_test.cc

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "rfa/audio_io.h"
#include "rfa/error.h"
#include "rfa/io_util.h"
#include "test_util.h"

namespace rfa {
namespace {

using testing::make_wav;
using testing::scratch_dir;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no rfa::Error thrown";
  return Errc::kIo;
}

TEST(LoadWav, MonoScaling) {
  auto dir = scratch_dir("mono");
  write_file_atomic(dir / "m.wav", make_wav({0, 16384, -32768}, 1, 16000));
  AudioClip clip = load_wav(dir / "m.wav");
  ASSERT_EQ(clip.samples.size(), 3u);
  EXPECT_EQ(clip.samples[0], 0.0);
  EXPECT_EQ(clip.samples[1], 0.5);
  EXPECT_EQ(clip.samples[2], -1.0);
  EXPECT_EQ(clip.sample_rate, 16000);
  EXPECT_EQ(clip.utterance_id, "m");
}

TEST(LoadWav, StereoDownmixAndRate) {
  auto dir = scratch_dir("stereo");
  write_file_atomic(dir / "s.wav", make_wav({100, 300, -2, 4}, 2, 44100));
  AudioClip clip = load_wav(dir / "s.wav");
  ASSERT_EQ(clip.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(clip.samples[0], 200.0 / 32768.0);
  EXPECT_DOUBLE_EQ(clip.samples[1], 1.0 / 32768.0);
  EXPECT_EQ(clip.sample_rate, 44100);
}

TEST(LoadWav, SkipsUnknownChunks) {
  auto dir = scratch_dir("chunks");
  std::string wav = make_wav({7, -7}, 1, 8000);
  // Insert an odd-sized LIST chunk (padded to even) before "fmt ".
  std::string list = std::string("LIST") + std::string("\x03\0\0\0", 4) + "abc" + '\0';
  wav.insert(12, list);
  const std::uint32_t riff = static_cast<std::uint32_t>(wav.size() - 8);
  for (int i = 0; i < 4; ++i) wav[4 + i] = static_cast<char>((riff >> (8 * i)) & 0xff);
  write_file_atomic(dir / "c.wav", wav);
  AudioClip clip = load_wav(dir / "c.wav");
  ASSERT_EQ(clip.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(clip.samples[0], 7.0 / 32768.0);
}

TEST(LoadWav, ErrorsAreDistinct) {
  auto dir = scratch_dir("errors");
  EXPECT_EQ(code_of([&] { load_wav(dir / "absent.wav"); }), Errc::kFileNotFound);

  write_file_atomic(dir / "junk.wav", "RIFX1234WAVEnothing");
  EXPECT_EQ(code_of([&] { load_wav(dir / "junk.wav"); }), Errc::kMalformedHeader);

  write_file_atomic(dir / "short.wav", "RIFF");
  EXPECT_EQ(code_of([&] { load_wav(dir / "short.wav"); }), Errc::kMalformedHeader);

  write_file_atomic(dir / "float.wav", make_wav({0, 0}, 1, 16000, 16, 3));
  EXPECT_EQ(code_of([&] { load_wav(dir / "float.wav"); }), Errc::kUnsupportedFormat);

  write_file_atomic(dir / "b8.wav", make_wav({0, 0}, 1, 16000, 8));
  EXPECT_EQ(code_of([&] { load_wav(dir / "b8.wav"); }), Errc::kUnsupportedFormat);

  write_file_atomic(dir / "ch3.wav", make_wav({0, 0, 0}, 3, 16000));
  EXPECT_EQ(code_of([&] { load_wav(dir / "ch3.wav"); }), Errc::kUnsupportedFormat);
}

TEST(LoadWav, RoundTripWithinOneLsb) {
  auto dir = scratch_dir("roundtrip");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AudioClip clip;
  clip.sample_rate = 22050;
  for (int i = 0; i < 5000; ++i) clip.samples.push_back(u(rng));
  clip.samples.push_back(-1.0);
  write_wav(dir / "rt.wav", clip);
  AudioClip back = load_wav(dir / "rt.wav");
  ASSERT_EQ(back.samples.size(), clip.samples.size());
  EXPECT_EQ(back.sample_rate, 22050);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    ASSERT_LE(std::abs(back.samples[i] - clip.samples[i]), 1.0 / 32768.0) << i;
  }
}

TEST(PeakNormalize, Examples) {
  AudioClip c;
  c.sample_rate = 8000;
  c.speaker_id = "s1";
  c.group = "A";
  c.samples = {0.2, -0.4};
  AudioClip n = peak_normalize(c);
  EXPECT_DOUBLE_EQ(n.samples[0], 0.5);
  EXPECT_EQ(n.samples[1], -1.0);
  EXPECT_EQ(n.speaker_id, "s1");
  EXPECT_EQ(n.group, "A");

  c.samples = {1.0, -0.5};
  EXPECT_EQ(peak_normalize(c).samples, c.samples);

  c.samples = {0.0, 0.0, 0.0};
  EXPECT_EQ(code_of([&] { peak_normalize(c); }), Errc::kSilentClip);
}

TEST(PeakNormalize, IdempotentBitwise) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.3);
  AudioClip c;
  c.sample_rate = 16000;
  for (int i = 0; i < 4096; ++i) c.samples.push_back(g(rng));
  AudioClip once = peak_normalize(c);
  AudioClip twice = peak_normalize(once);
  EXPECT_EQ(once.samples, twice.samples);
  double peak = 0.0;
  for (double x : once.samples) peak = std::max(peak, std::abs(x));
  EXPECT_EQ(peak, 1.0);
}

TEST(Manifest, ParsesAndResolvesPaths) {
  auto m = parse_manifest(
      "path,utterance_id,speaker_id,group\n"
      "a/x.wav,u1,s1,A\n"
      "/abs/y.wav,u2,s2,P\n"
      "z.wav,u3,s1,A\n",
      "/data/corpus");
  ASSERT_EQ(m.entries.size(), 3u);
  EXPECT_EQ(m.groups, (std::set<std::string>{"A", "P"}));
  EXPECT_EQ(m.entries[0].path, std::filesystem::path("/data/corpus/a/x.wav"));
  EXPECT_EQ(m.entries[1].path, std::filesystem::path("/abs/y.wav"));
  EXPECT_EQ(m.speaker_count(), 2u);
}

TEST(Manifest, ColumnOrderBomAndCrlf) {
  auto m = parse_manifest(
      "\xEF\xBB\xBFgroup,speaker_id,extra,utterance_id,path\r\n"
      "A,s1,ignored,u1,x.wav\r\n"
      "\r\n",
      "/d");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].utterance_id, "u1");
  EXPECT_EQ(m.entries[0].group, "A");
}

TEST(Manifest, Errors) {
  EXPECT_EQ(code_of([] { parse_manifest("", "/"); }), Errc::kEmptyInput);
  EXPECT_EQ(code_of([] { parse_manifest("path,utterance_id,group\nx,u,A\n", "/"); }),
            Errc::kMissingColumn);
  EXPECT_EQ(code_of([] {
              parse_manifest("path,utterance_id,speaker_id,group\nx,u,s,A\ny,u,s,A\n", "/");
            }),
            Errc::kDuplicateId);
  auto dir = scratch_dir("manifest_missing");
  EXPECT_EQ(code_of([&] { load_manifest(dir / "none.csv"); }), Errc::kFileNotFound);
}

TEST(Manifest, NineteenSpeakersFourHundredEightRows) {
  // Table 1 layout: 19 speakers, 408 utterances in total.
  std::string text = "path,utterance_id,speaker_id,group\n";
  std::size_t rows = 0;
  for (int s = 0; s < 19; ++s) {
    const int n = 408 / 19 + (s < 408 % 19 ? 1 : 0);
    for (int u = 0; u < n; ++u, ++rows) {
      const char* g = s < 7 ? "A" : (s < 13 ? "P" : "D");
      text += "w/" + std::to_string(rows) + ".wav,utt" + std::to_string(rows) + ",spk" +
              std::to_string(s) + "," + g + "\n";
    }
  }
  ASSERT_EQ(rows, 408u);
  auto m = parse_manifest(text, "/c");
  EXPECT_EQ(m.entries.size(), 408u);
  EXPECT_EQ(m.speaker_count(), 19u);
  EXPECT_EQ(m.groups.size(), 3u);
  std::size_t total = 0;
  for (const auto& [g, n] : m.utterances_per_group()) total += n;
  EXPECT_EQ(total, 408u);
}

TEST(Manifest, WriteLoadRoundTrip) {
  auto dir = scratch_dir("manifest_rt");
  DatasetManifest m;
  m.entries.push_back({dir / "clips" / "a.wav", "a", "s1", "A"});
  m.entries.push_back({dir / "b, with comma.wav", "b", "s2", "P"});
  m.groups = {"A", "P"};
  write_manifest(dir / "manifest.csv", m);
  const std::string text = read_file(dir / "manifest.csv");
  EXPECT_NE(text.find("clips/a.wav"), std::string::npos);
  auto back = load_manifest(dir / "manifest.csv");
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[0].path, m.entries[0].path);
  EXPECT_EQ(back.entries[1].path, m.entries[1].path);
  EXPECT_EQ(back.groups, m.groups);
}

}  // namespace
}  // namespace rfa
