#include <gtest/gtest.h>

#include <cmath>

#include "ecogvoice/dsp.hpp"
#include "ecogvoice/synthlab.hpp"
#include "ecogvoice/voicequality.hpp"
#include "signals.hpp"

using namespace ecogvoice;

namespace {

struct Measured {
  std::optional<double> jitter, shimmer, hnr;
};

Measured measure(const synth::VoiceSpec& spec) {
  auto v = synth::synth_voice(spec);
  auto track = dsp::pitch_track(v.clip);
  auto seqs = vq::track_periods(v.clip, track);
  return {vq::jitter(seqs), vq::shimmer(seqs), vq::hnr(v.clip, track)};
}

}  // namespace

TEST(Jitter, HandComputedSequence) {
  vq::PeriodSequence s;
  s.period_lengths = {0.010, 0.011, 0.010, 0.011};
  s.period_amplitudes = {1.0, 1.0, 1.0, 1.0};
  // mean |diff| = 0.001, mean period = 0.0105
  EXPECT_NEAR(*vq::jitter(std::span(&s, 1)), 0.001 / 0.0105, 1e-12);
  EXPECT_NEAR(*vq::shimmer(std::span(&s, 1)), 0.0, 1e-12);
}

TEST(Jitter, NoPairsIsMissing) {
  vq::PeriodSequence s;
  s.period_lengths = {0.01};
  s.period_amplitudes = {1.0};
  EXPECT_FALSE(vq::jitter(std::span(&s, 1)).has_value());
  EXPECT_FALSE(vq::jitter(std::span<const vq::PeriodSequence>{}).has_value());
}

TEST(Shimmer, GainInvariant) {
  vq::PeriodSequence s;
  s.period_lengths = {0.01, 0.01, 0.01};
  s.period_amplitudes = {1.0, 0.8, 1.0};
  auto scaled = s;
  for (auto& a : scaled.period_amplitudes) a *= 4.0;
  EXPECT_NEAR(*vq::shimmer(std::span(&s, 1)), *vq::shimmer(std::span(&scaled, 1)), 1e-12);
}

TEST(Jitter, SyntheticClosedForm) {
  for (double eps : {0.005, 0.01, 0.02, 0.04}) {
    auto m = measure(testsig::voice(120.0, eps, 0.0, 60.0, 7));
    ASSERT_TRUE(m.jitter.has_value());
    EXPECT_NEAR(*m.jitter / (2 * eps), 1.0, 0.10) << eps;
  }
}

TEST(Shimmer, SyntheticClosedForm) {
  for (double eps : {0.005, 0.01, 0.02, 0.04}) {
    auto m = measure(testsig::voice(120.0, 0.0, eps, 60.0, 7));
    ASSERT_TRUE(m.shimmer.has_value());
    EXPECT_NEAR(*m.shimmer / (2 * eps), 1.0, 0.10) << eps;
  }
}

TEST(Jitter, RandomWalkLawIsNotLargerThanAlternating) {
  auto spec = testsig::voice(120.0, 0.02, 0.0, 60.0, 7);
  auto alt = measure(spec);
  spec.law = synth::PerturbationLaw::random_walk;
  auto rw = measure(spec);
  ASSERT_TRUE(rw.jitter.has_value());
  EXPECT_LE(*rw.jitter, *alt.jitter * 1.05);
  EXPECT_GT(*rw.jitter, 0.0);
}

TEST(Hnr, TracksSnr) {
  for (double snr : {0.0, 10.0, 20.0}) {
    auto m = measure(testsig::voice(120.0, 0.0, 0.0, snr, 3));
    ASSERT_TRUE(m.hnr.has_value()) << snr;
    EXPECT_NEAR(*m.hnr, snr, 1.5) << snr;
  }
}

TEST(Hnr, CleanSignalAtClampCeiling) {
  auto m = measure(testsig::voice(120.0, 0.0, 0.0, 200.0, 3));
  ASSERT_TRUE(m.hnr.has_value());
  const double ceiling = 10.0 * std::log10(vq::kHnrClampHi / (1.0 - vq::kHnrClampHi));
  EXPECT_GE(*m.hnr, 29.9);
  EXPECT_LE(*m.hnr, ceiling + 1e-9);
}

TEST(Hnr, UnvoicedIsMissing) {
  auto clip = testsig::silence(0.5);
  EXPECT_FALSE(vq::hnr(clip, dsp::pitch_track(clip)).has_value());
}

TEST(Periods, MarksFollowGroundTruth) {
  auto v = synth::synth_voice(testsig::voice(150.0, 0.01, 0.0, 60.0, 2));
  auto seqs = vq::track_periods(v.clip, dsp::pitch_track(v.clip));
  ASSERT_FALSE(seqs.empty());
  double mean = 0.0;
  std::size_t n = 0;
  for (const auto& s : seqs)
    for (double t : s.period_lengths) {
      mean += t;
      ++n;
    }
  mean /= static_cast<double>(n);
  EXPECT_NEAR(mean, 1.0 / 150.0, 0.01 / 150.0);
  for (const auto& s : seqs) EXPECT_EQ(s.period_lengths.size(), s.period_amplitudes.size());
}
