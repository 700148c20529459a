// tests/envelopes_test.cc

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "rfa/envelopes.h"
#include "rfa/error.h"

namespace rfa {
namespace {

constexpr double kPi = std::numbers::pi;

AudioClip make_clip(std::vector<double> x, int rate) {
  AudioClip c;
  c.samples = std::move(x);
  c.sample_rate = rate;
  c.utterance_id = "t";
  return c;
}

// Brute-force Hilbert transformer: ideal impulse response 2/(pi n) on odd
// taps, Blackman windowed. Independent of any FFT code.
std::vector<double> fir_hilbert(const std::vector<double>& x, int half) {
  std::vector<double> h(2 * half + 1, 0.0);
  for (int n = -half; n <= half; ++n) {
    if (n % 2 == 0) continue;
    const double w = 0.42 + 0.5 * std::cos(kPi * n / half) + 0.08 * std::cos(2 * kPi * n / half);
    h[n + half] = 2.0 / (kPi * n) * w;
  }
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    for (int n = -half; n <= half; ++n) {
      const long j = static_cast<long>(i) - n;
      if (j >= 0 && j < static_cast<long>(x.size())) acc += h[n + half] * x[j];
    }
    y[i] = acc;
  }
  return y;
}

TEST(AnalyticMagnitude, CosineHasConstantMagnitude) {
  const int fs = 8000;
  std::vector<double> x(fs);
  const double a = 0.7;
  for (int i = 0; i < fs; ++i) x[i] = a * std::cos(2 * kPi * 437.3 * i / fs + 0.4);
  auto m = analytic_magnitude(x);
  ASSERT_EQ(m.size(), x.size());
  double worst = 0.0;
  for (int i = fs / 20; i < fs - fs / 20; ++i) worst = std::max(worst, std::abs(m[i] - a) / a);
  EXPECT_LT(worst, 0.01);
}

TEST(AnalyticMagnitude, ZerosAndEmpty) {
  std::vector<double> z(100, 0.0);
  for (double v : analytic_magnitude(z)) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(analytic_magnitude(std::vector<double>{}), Error);
}

TEST(AnalyticMagnitude, AmToneMatchesModulatorAndFirOracle) {
  const int fs = 16000;
  const int n = 2 * fs;
  std::vector<double> x(n), truth(n);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    truth[i] = 1.0 + 0.5 * std::cos(2 * kPi * 3 * t);
    x[i] = truth[i] * std::cos(2 * kPi * 220 * t);
  }
  auto m = analytic_magnitude(x);
  auto hx = fir_hilbert(x, 400);
  const int lo = n / 20, hi = n - n / 20;
  double se_truth = 0.0, se_fir = 0.0;
  for (int i = lo; i < hi; ++i) {
    const double fir_mag = std::hypot(x[i], hx[i]);
    se_truth += (m[i] - truth[i]) * (m[i] - truth[i]);
    se_fir += (m[i] - fir_mag) * (m[i] - fir_mag);
    ASSERT_GE(m[i], 0.0);
  }
  EXPECT_LT(std::sqrt(se_truth / (hi - lo)), 0.02);
  EXPECT_LT(std::sqrt(se_fir / (hi - lo)), 0.02);
}

TEST(MovingAverage, CenteredAndEdgeTruncated) {
  std::vector<double> x = {1, 2, 3, 4, 5};
  auto y = moving_average(x, 3);
  ASSERT_EQ(y.size(), 5u);
  EXPECT_DOUBLE_EQ(y[0], 1.5);
  EXPECT_DOUBLE_EQ(y[1], 2.0);
  EXPECT_DOUBLE_EQ(y[2], 3.0);
  EXPECT_DOUBLE_EQ(y[4], 4.5);
}

TEST(BlockDecimate, AveragesBlocksAndDropsPartialTail) {
  std::vector<double> x = {1, 3, 5, 7, 9, 11, 100};
  auto y = block_decimate(x, 2.0, 1.0);
  ASSERT_EQ(y.size(), 3u);
  EXPECT_DOUBLE_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], 6.0);
  EXPECT_DOUBLE_EQ(y[2], 10.0);
}

TEST(BlockDecimate, PreservesMeanOverWholeBlocks) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(44100 * 3);
  for (double& v : x) v = u(rng);
  // 441 input samples per output sample; 3 s is a whole number of blocks.
  auto y = block_decimate(x, 44100.0, 100.0);
  ASSERT_EQ(y.size(), 300u);
  double mx = 0.0, my = 0.0;
  for (double v : x) mx += v;
  for (double v : y) my += v;
  mx /= x.size();
  my /= y.size();
  EXPECT_NEAR(my, mx, 1e-6 * mx);
}

TEST(AmEnvelope, LengthIsDurationTimesRate) {
  const int fs = 44100;
  std::vector<double> x(12 * fs);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * 200.0 * i / fs);
  Envelope e = am_envelope(make_clip(x, fs));
  EXPECT_EQ(e.values.size(), 1200u);
  EXPECT_EQ(e.rate, 100.0);
  EXPECT_EQ(e.kind, EnvelopeKind::kAm);
}

TEST(AmEnvelope, ConstantSineGivesFlatEnvelope) {
  const int fs = 16000;
  std::vector<double> x(4 * fs);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * 310.0 * i / fs);
  Envelope e = am_envelope(make_clip(x, fs));
  const std::size_t trim = e.values.size() / 20;
  for (std::size_t i = trim; i + trim < e.values.size(); ++i) {
    ASSERT_NEAR(e.values[i], 1.0, 0.02) << i;
  }
  for (double v : e.values) ASSERT_GE(v, 0.0);
}

TEST(AmEnvelope, CommutesWithPositiveScaling) {
  const int fs = 16000;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 0.2);
  std::vector<double> x(2 * fs), ax(2 * fs);
  const double a = 3.7;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = g(rng);
    ax[i] = a * x[i];
  }
  Envelope e = am_envelope(make_clip(x, fs));
  Envelope ea = am_envelope(make_clip(ax, fs));
  ASSERT_EQ(e.values.size(), ea.values.size());
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    ASSERT_NEAR(ea.values[i], a * e.values[i], 1e-9 * a * e.values[i]);
  }
}

TEST(AmEnvelope, DecimationKeepsSmoothedMean) {
  const int fs = 8000;
  std::vector<double> x(3 * fs);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = (1 + 0.4 * std::cos(2 * kPi * 4 * t)) * std::cos(2 * kPi * 300 * t);
  }
  EnvelopeConfig cfg;
  auto smoothed = moving_average(analytic_magnitude(x), static_cast<std::size_t>(0.05 * fs));
  Envelope e = am_envelope(make_clip(x, fs), cfg);
  double ms = 0.0, me = 0.0;
  for (double v : smoothed) ms += v;
  for (double v : e.values) me += v;
  ms /= smoothed.size();
  me /= e.values.size();
  EXPECT_NEAR(me, ms, 1e-6 * ms);
}

TEST(AmEnvelope, TooShort) {
  EXPECT_THROW(am_envelope(make_clip({0.1, 0.2, 0.3}, 16000)), Error);
}

// Impulse train through a one-pole low-pass: a crude glottal source.
std::vector<double> pulse_train(double f0, int fs, double seconds) {
  std::vector<double> x(static_cast<std::size_t>(seconds * fs), 0.0);
  double phase = 0.0, y = 0.0;
  for (auto& v : x) {
    phase += f0 / fs;
    double impulse = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      impulse = 1.0;
    }
    y = 0.9 * y + impulse;
    v = y;
  }
  return x;
}

TEST(TrackF0, PulseTrainAt120Hz) {
  const int fs = 16000;
  F0Contour c = track_f0(make_clip(pulse_train(120.0, fs, 2.0), fs));
  std::vector<double> voiced;
  for (std::size_t i = 0; i < c.f0.size(); ++i) {
    ASSERT_EQ(c.f0[i] > 0, c.voicing[i] != 0);
    if (c.voicing[i]) {
      voiced.push_back(c.f0[i]);
      ASSERT_GE(c.f0[i], 60.0);
      ASSERT_LE(c.f0[i], 400.0);
    }
  }
  ASSERT_GT(voiced.size(), c.f0.size() / 2);
  std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2, voiced.end());
  EXPECT_NEAR(voiced[voiced.size() / 2], 120.0, 2.0);
}

TEST(TrackF0, WhiteNoiseMostlyUnvoiced) {
  const int fs = 16000;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<double> x(2 * fs);
  for (double& v : x) v = g(rng);
  EXPECT_LT(track_f0(make_clip(x, fs)).voiced_fraction(), 0.2);
}

TEST(TrackF0, SilenceAllUnvoiced) {
  F0Contour c = track_f0(make_clip(std::vector<double>(16000, 0.0), 16000));
  ASSERT_FALSE(c.f0.empty());
  for (char v : c.voicing) EXPECT_EQ(v, 0);
  for (double f : c.f0) EXPECT_EQ(f, 0.0);
}

TEST(FmEnvelope, MedianFill) {
  F0Contour c;
  c.f0 = {100, 0, 104};
  c.voicing = {1, 0, 1};
  c.hop_s = 0.01;
  c.frame_s = 0.0;  // frame centres on the output grid
  c.duration_s = 0.03;
  Envelope e = fm_envelope(c);
  ASSERT_EQ(e.values.size(), 3u);
  EXPECT_DOUBLE_EQ(e.values[0], 100.0);
  EXPECT_DOUBLE_EQ(e.values[1], 102.0);
  EXPECT_DOUBLE_EQ(e.values[2], 104.0);
  EXPECT_EQ(e.kind, EnvelopeKind::kFm);
}

TEST(FmEnvelope, AllVoicedUnchangedOnMatchingGrid) {
  F0Contour c;
  c.f0 = {120, 121, 125, 130, 128};
  c.voicing = {1, 1, 1, 1, 1};
  c.hop_s = 0.01;
  c.frame_s = 0.0;
  c.duration_s = 0.05;
  Envelope e = fm_envelope(c);
  EXPECT_EQ(e.values, c.f0);
}

TEST(FmEnvelope, InsufficientVoicing) {
  F0Contour c;
  c.f0.assign(100, 0.0);
  c.voicing.assign(100, 0);
  c.f0[3] = 150.0;
  c.voicing[3] = 1;
  c.hop_s = 0.01;
  c.frame_s = 0.04;
  try {
    fm_envelope(c);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInsufficientVoicing);
  }
}

TEST(FmEnvelope, SinusoidalF0StaysInRangeWithoutZeros) {
  const int fs = 16000;
  std::vector<double> x(3 * fs);
  double phase = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    const double f0 = 150 + 20 * std::sin(2 * kPi * 3 * t);
    phase += 2 * kPi * f0 / fs;
    double s = 0.0;
    for (int h = 1; h <= 10; ++h) s += std::sin(h * phase);
    x[i] = s / 10;
  }
  Envelope e = fm_envelope(track_f0(make_clip(x, fs)));
  EXPECT_EQ(e.values.size(), 300u);
  double lo = 1e9, hi = 0.0;
  for (double v : e.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GT(lo, 60.0);
  EXPECT_LT(hi, 400.0);
  EXPECT_NEAR(lo, 130.0, 4.0);
  EXPECT_NEAR(hi, 170.0, 4.0);
}

TEST(Envelope, TsvExport) {
  Envelope e;
  e.values = {0.5, 0.25};
  e.rate = 100;
  EXPECT_EQ(envelope_to_tsv(e), "time_s\tvalue\n0\t0.5\n0.01\t0.25\n");
}

}  // namespace
}  // namespace rfa
