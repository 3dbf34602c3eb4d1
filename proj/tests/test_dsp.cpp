#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ecogvoice/dsp.hpp"
#include "ecogvoice/synthlab.hpp"
#include "signals.hpp"

using namespace ecogvoice;
using namespace ecogvoice::dsp;

namespace {

FrameSeries series_of(const std::function<double(int, int)>& f, int frames, int coeffs) {
  FrameSeries s;
  s.values.resize(frames, coeffs);
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < coeffs; ++c) s.values(t, c) = f(t, c);
  s.frame_len = 1102;
  s.hop = 441;
  s.sample_rate = 44100;
  return s;
}

corpus::AudioClip white_noise(double seconds, std::uint64_t seed, double amp = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, amp);
  corpus::AudioClip c;
  c.sample_rate = 44100;
  c.samples.resize(static_cast<std::size_t>(seconds * 44100));
  for (auto& v : c.samples) v = std::clamp(n(rng), -1.0, 1.0);
  return c;
}

}  // namespace

TEST(Mfcc, FrameCountFormula) {
  auto clip = testsig::sine(440.0, 1.0);
  auto m = mfcc(clip);
  EXPECT_EQ(m.frames(), 98);
  EXPECT_EQ(m.coefficients(), 12);
  EXPECT_EQ(m.frame_len, 1102);
  EXPECT_EQ(m.hop, 441);
  EXPECT_EQ(frame_count(44100, 1102, 441), 98u);
  EXPECT_TRUE(m.values.allFinite());
}

TEST(Mfcc, TooShortThrows) {
  auto clip = testsig::sine(440.0, 0.01);
  EXPECT_THROW(mfcc(clip), std::invalid_argument);
}

TEST(Mfcc, GainShiftsOnlyC0) {
  auto clip = white_noise(0.5, 3, 0.1);
  auto loud = clip;
  for (auto& v : loud.samples) v *= 2.0;
  auto a = mfcc(clip), b = mfcc(loud);
  // log(4) lands in c0 through the orthonormal DCT: sqrt(n_mels) * log 4
  const double shift = std::sqrt(26.0) * std::log(4.0);
  for (Eigen::Index t = 0; t < a.frames(); ++t) {
    EXPECT_NEAR(b.values(t, 0) - a.values(t, 0), shift, 1e-6);
    for (Eigen::Index c = 1; c < 12; ++c) EXPECT_NEAR(b.values(t, c), a.values(t, c), 1e-6);
  }
}

TEST(Mfcc, StationarySawtoothHasTinyVariance) {
  corpus::AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.resize(44100);
  const double period = 44100.0 / 220.0;
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const double ph = std::fmod(static_cast<double>(i), period) / period;
    clip.samples[i] = 0.4 * (2.0 * ph - 1.0);
  }
  auto m = mfcc(clip);
  for (Eigen::Index c = 0; c < 12; ++c) {
    const double mean = m.values.col(c).mean();
    const double var = (m.values.col(c).array() - mean).square().mean();
    EXPECT_LT(var, 1e-3 * std::abs(mean)) << "coefficient " << c;
  }
}

TEST(Mfcc, ShiftCovariantByOneHop) {
  auto clip = white_noise(0.5, 5);
  corpus::AudioClip shifted{std::vector<double>(clip.samples.begin() + 441, clip.samples.end()), 44100};
  auto a = mfcc(clip), b = mfcc(shifted);
  ASSERT_EQ(b.frames(), a.frames() - 1);
  for (Eigen::Index t = 0; t < b.frames(); ++t)
    for (Eigen::Index c = 0; c < 12; ++c) EXPECT_NEAR(b.values(t, c), a.values(t + 1, c), 1e-9);
}

TEST(MelFilterbank, TrianglesPeakAtOneAndCoverBand) {
  auto fb = mel_filterbank(26, 2048, 44100);
  ASSERT_EQ(fb.rows(), 26);
  ASSERT_EQ(fb.cols(), 1025);
  for (Eigen::Index m = 0; m < fb.rows(); ++m) {
    EXPECT_LE(fb.row(m).maxCoeff(), 1.0 + 1e-12);
    EXPECT_GT(fb.row(m).maxCoeff(), 0.5);
    EXPECT_GE(fb.row(m).minCoeff(), 0.0);
  }
}

TEST(SavitzkyGolay, CoefficientsMatchPolynomialFit) {
  // Least-squares quadratic on offsets -4..4: slope weights k / sum(k^2).
  auto d1 = savgol_coefficients(9, 2, 1);
  for (int k = -4; k <= 4; ++k) EXPECT_NEAR(d1[static_cast<std::size_t>(k + 4)], k / 60.0, 1e-12);
  auto d0 = savgol_coefficients(9, 2, 0);
  double s = 0.0;
  for (double w : d0) s += w;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(SavitzkyGolay, ExactOnLinearAndQuadratic) {
  auto lin = series_of([](int t, int c) { return 3.0 * t + c; }, 40, 3);
  auto d = sg_derivative(lin, 1);
  for (int t = 4; t < 36; ++t)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(d.values(t, c), 3.0, 1e-9);
  auto quad = series_of([](int t, int) { return static_cast<double>(t) * t; }, 40, 2);
  auto dd = sg_derivative(quad, 2);
  for (int t = 4; t < 36; ++t) EXPECT_NEAR(dd.values(t, 0), 2.0, 1e-9);
}

TEST(SavitzkyGolay, ConstantGivesZeroAndShapeKept) {
  auto c = series_of([](int, int) { return 7.5; }, 5, 4);
  for (int order : {1, 2}) {
    auto d = sg_derivative(c, order);
    EXPECT_EQ(d.values.rows(), 5);
    EXPECT_EQ(d.values.cols(), 4);
    EXPECT_NEAR(d.values.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(SavitzkyGolay, Linear) {
  auto x = series_of([](int t, int c) { return std::sin(0.3 * t + c); }, 30, 3);
  auto y = series_of([](int t, int c) { return std::cos(0.17 * t * c); }, 30, 3);
  auto z = x;
  z.values = 2.5 * x.values - 1.5 * y.values;
  for (int order : {1, 2}) {
    auto dz = sg_derivative(z, order);
    Eigen::MatrixXd expect = 2.5 * sg_derivative(x, order).values - 1.5 * sg_derivative(y, order).values;
    EXPECT_LT((dz.values - expect).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SavitzkyGolay, BadOrderThrows) {
  auto c = series_of([](int, int) { return 1.0; }, 10, 1);
  EXPECT_THROW(sg_derivative(c, 3), std::invalid_argument);
  EXPECT_THROW(sg_derivative(c, 0), std::invalid_argument);
}

TEST(Pitch, PureSine) {
  auto track = pitch_track(testsig::sine(200.0, 1.0));
  ASSERT_GT(track.frames(), 0u);
  for (std::size_t i = 0; i < track.frames(); ++i) {
    ASSERT_TRUE(track.voiced(i)) << i;
    EXPECT_NEAR(*track.f0[i], 200.0, 1.0);
  }
}

TEST(Pitch, WhiteNoiseMostlyUnvoiced) {
  EXPECT_LT(pitch_track(white_noise(1.0, 9)).voiced_fraction(), 0.10);
}

TEST(Pitch, SilenceUnvoiced) {
  auto track = pitch_track(testsig::silence(0.5));
  EXPECT_EQ(track.voiced_fraction(), 0.0);
  for (const auto& f : track.f0) EXPECT_FALSE(f.has_value());
}

TEST(Pitch, VoicedFramesInBand) {
  auto v = synth::synth_voice(testsig::voice(180.0, 0.01, 0.02, 20.0, 4));
  auto track = pitch_track(v.clip);
  for (const auto& f : track.f0)
    if (f) {
      EXPECT_GE(*f, 75.0);
      EXPECT_LE(*f, 500.0);
    }
}

TEST(Pitch, HarmonicVoicesWithinOnePercent) {
  for (double f0 : {100.0, 150.0, 250.0, 400.0}) {
    auto v = synth::synth_voice(testsig::voice(f0));
    auto track = pitch_track(v.clip);
    double sum = 0.0;
    int n = 0;
    for (const auto& f : track.f0)
      if (f) {
        sum += *f;
        ++n;
      }
    ASSERT_GT(n, 0);
    EXPECT_NEAR(sum / n, f0, 0.01 * f0) << f0;
  }
}

TEST(Formants, TwoPoleVowels) {
  struct Case {
    double f1, f2;
  };
  for (auto c : {Case{500, 1500}, Case{700, 1700}}) {
    auto spec = testsig::voice(120.0);
    spec.formant_poles = {{c.f1, 80.0}, {c.f2, 110.0}};
    auto v = synth::synth_voice(spec);
    auto est = formants(v.clip, pitch_track(v.clip));
    ASSERT_TRUE(est.has_value());
    EXPECT_NEAR(est->f1_mean, c.f1, 25.0 * c.f1 / 500.0);
    EXPECT_NEAR(est->f2_mean, c.f2, 50.0 * c.f2 / 1500.0);
  }
}

TEST(Formants, PureSineHasNoTwoFormantFrames) {
  auto clip = testsig::sine(200.0, 1.0);
  auto est = formants(clip, pitch_track(clip));
  if (est) EXPECT_GT(est->frames_used, 0u);
}

TEST(Resample, PreservesSineFrequency) {
  auto clip = testsig::sine(440.0, 0.5, 44100);
  auto r = resample(clip, 10000);
  EXPECT_EQ(r.sample_rate, 10000);
  EXPECT_NEAR(static_cast<double>(r.samples.size()), 5000.0, 2.0);
  // compare interior against the analytic sine
  double err = 0.0;
  for (std::size_t i = 200; i + 200 < r.samples.size(); ++i)
    err = std::max(err, std::abs(r.samples[i] - 0.5 * std::sin(2 * std::numbers::pi * 440.0 * i / 10000.0)));
  EXPECT_LT(err, 0.01);
}

TEST(Lpc, RecoversKnownResonance) {
  // AR(2) with a pole pair at 1000 Hz, radius 0.97, fs 10 kHz.
  const double r = 0.97, th = 2 * std::numbers::pi * 1000.0 / 10000.0;
  const double a1 = -2 * r * std::cos(th), a2 = r * r;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(4000, 0.0);
  for (std::size_t i = 2; i < x.size(); ++i) x[i] = n(rng) - a1 * x[i - 1] - a2 * x[i - 2];
  auto a = lpc(x, 2);
  auto res = lpc_resonances(a, 10000);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_NEAR(res[0].frequency, 1000.0, 20.0);
  const double bw = -std::log(r) * 10000.0 / std::numbers::pi;
  EXPECT_NEAR(res[0].bandwidth, bw, 0.5 * bw);
}

TEST(Dsp, Deterministic) {
  auto v = synth::synth_voice(testsig::voice(150.0, 0.01, 0.02, 25.0, 6));
  auto a = mfcc(v.clip), b = mfcc(v.clip);
  EXPECT_TRUE(a.values == b.values);
  auto p = pitch_track(v.clip), q = pitch_track(v.clip);
  EXPECT_EQ(p.f0, q.f0);
}
