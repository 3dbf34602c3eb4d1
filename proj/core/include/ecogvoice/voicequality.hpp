#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ecogvoice/dsp.hpp"

namespace ecogvoice::vq {

using corpus::AudioClip;
using dsp::PitchTrack;

// Glottal cycles from one voiced run. Period i spans mark i to mark i+1 and
// carries the peak amplitude at mark i, so both lists have one entry per period.
struct PeriodSequence {
  std::vector<double> period_lengths;     // seconds
  std::vector<double> period_amplitudes;  // |x| at the period's opening mark
  std::size_t region_begin = 0;           // sample range of the voiced run
  std::size_t region_end = 0;
};

struct MarkConfig {
  double window_lo = 0.8;   // next-mark search window, in expected periods
  double window_hi = 1.25;
};

// Positive-peak pitch marks per maximal voiced run, seeded from the run's
// global maximum and walked both ways. Runs with fewer than 3 marks are dropped.
std::vector<PeriodSequence> track_periods(const AudioClip& clip, const PitchTrack& track,
                                          const MarkConfig& config = {});

// Mean |T[i+1] - T[i]| over within-run pairs divided by the mean period.
// nullopt when no run has a consecutive pair.
std::optional<double> jitter(std::span<const PeriodSequence> seqs);

// Same ratio over period amplitudes.
std::optional<double> shimmer(std::span<const PeriodSequence> seqs);

inline constexpr double kHnrClampLo = 1e-3;
inline constexpr double kHnrClampHi = 1.0 - 1e-3;

// Mean over voiced frames of 10 log10(r / (1 - r)), r being the normalized
// autocorrelation at the f0 lag clamped to [1e-3, 1 - 1e-3].
std::optional<double> hnr(const AudioClip& clip, const PitchTrack& track);

}  // namespace ecogvoice::vq
