#include "ecogvoice/voicequality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ecogvoice::vq {

namespace {

constexpr int kSincHalf = 8;

// Band-limited interpolation of r at fractional lag t (Hann-windowed sinc).
double sinc_interp(const std::vector<double>& r, double t) {
  const int base = static_cast<int>(std::floor(t));
  double acc = 0.0;
  for (int j = base - kSincHalf + 1; j <= base + kSincHalf; ++j) {
    if (j < 0 || j >= static_cast<int>(r.size())) continue;
    const double d = t - j;
    const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * d / kSincHalf);
    const double s = std::abs(d) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
    acc += r[j] * s * w;
  }
  return acc;
}

// Golden-section maximum of the interpolated r within one lag of integer peak k.
double refine_peak(const std::vector<double>& r, int k) {
  constexpr double g = 0.6180339887498949;
  double lo = k - 1.0, hi = k + 1.0;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = sinc_interp(r, a), fb = sinc_interp(r, b);
  for (int it = 0; it < 30; ++it) {
    if (fa < fb) {
      lo = a; a = b; fa = fb;
      b = lo + g * (hi - lo); fb = sinc_interp(r, b);
    } else {
      hi = b; b = a; fb = fa;
      a = hi - g * (hi - lo); fa = sinc_interp(r, a);
    }
  }
  return std::max({fa, fb, r[k]});
}

struct Mark {
  double position;  // refined, in samples
  double amplitude;
};

// Parabolic refinement around an integer maximum.
Mark refine(std::span<const double> x, std::size_t i) {
  if (i == 0 || i + 1 >= x.size()) return {static_cast<double>(i), std::abs(x[i])};
  const double y0 = x[i - 1], y1 = x[i], y2 = x[i + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom >= 0.0) return {static_cast<double>(i), std::abs(y1)};
  const double delta = std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);
  return {static_cast<double>(i) + delta, std::abs(y1 - 0.25 * (y0 - y2) * delta)};
}

std::size_t argmax(std::span<const double> x, std::size_t b, std::size_t e) {
  std::size_t best = b;
  for (std::size_t i = b + 1; i < e; ++i)
    if (x[i] > x[best]) best = i;
  return best;
}

// Expected period in samples at a sample position, from the nearest voiced frame.
double expected_period(const PitchTrack& track, std::size_t first, std::size_t last, double pos) {
  const double centre = pos - track.frame_len / 2.0;
  auto f = static_cast<std::ptrdiff_t>(std::lround(centre / track.hop));
  f = std::clamp<std::ptrdiff_t>(f, static_cast<std::ptrdiff_t>(first),
                                 static_cast<std::ptrdiff_t>(last));
  return track.sample_rate / *track.f0[static_cast<std::size_t>(f)];
}

std::optional<double> mean_relative_difference(std::span<const PeriodSequence> seqs,
                                               bool amplitudes) {
  double diff_sum = 0.0, value_sum = 0.0;
  std::size_t pairs = 0, values = 0;
  for (const auto& s : seqs) {
    const auto& v = amplitudes ? s.period_amplitudes : s.period_lengths;
    for (std::size_t i = 0; i < v.size(); ++i) {
      value_sum += v[i];
      ++values;
      if (i + 1 < v.size()) {
        diff_sum += std::abs(v[i + 1] - v[i]);
        ++pairs;
      }
    }
  }
  if (pairs == 0 || value_sum <= 0.0) return std::nullopt;
  return (diff_sum / pairs) / (value_sum / values);
}

}  // namespace

std::vector<PeriodSequence> track_periods(const AudioClip& clip, const PitchTrack& track,
                                          const MarkConfig& config) {
  std::vector<PeriodSequence> out;
  const std::span<const double> x(clip.samples);
  const std::size_t n = x.size();
  const double sr = clip.sample_rate;

  for (std::size_t f = 0; f < track.frames();) {
    if (!track.voiced(f)) {
      ++f;
      continue;
    }
    std::size_t g = f;
    while (g + 1 < track.frames() && track.voiced(g + 1)) ++g;
    const std::size_t begin = f * static_cast<std::size_t>(track.hop);
    const std::size_t end = std::min(n, g * static_cast<std::size_t>(track.hop) + track.frame_len);

    std::vector<Mark> marks;
    const std::size_t seed = argmax(x, begin, end);
    marks.push_back(refine(x, seed));

    // forward
    for (std::size_t cur = seed;;) {
      const double p = expected_period(track, f, g, static_cast<double>(cur));
      const auto lo = static_cast<std::size_t>(std::ceil(cur + config.window_lo * p));
      const auto hi = static_cast<std::size_t>(std::floor(cur + config.window_hi * p));
      if (hi >= end || lo > hi) break;
      cur = argmax(x, lo, hi + 1);
      marks.push_back(refine(x, cur));
    }
    // backward
    std::vector<Mark> before;
    for (std::size_t cur = seed;;) {
      const double p = expected_period(track, f, g, static_cast<double>(cur));
      const double lo_d = std::ceil(static_cast<double>(cur) - config.window_hi * p);
      const double hi_d = std::floor(static_cast<double>(cur) - config.window_lo * p);
      if (lo_d < static_cast<double>(begin) || lo_d > hi_d) break;
      cur = argmax(x, static_cast<std::size_t>(lo_d), static_cast<std::size_t>(hi_d) + 1);
      before.push_back(refine(x, cur));
    }
    marks.insert(marks.begin(), before.rbegin(), before.rend());

    if (marks.size() >= 3) {
      PeriodSequence seq;
      seq.region_begin = begin;
      seq.region_end = end;
      for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        seq.period_lengths.push_back((marks[i + 1].position - marks[i].position) / sr);
        seq.period_amplitudes.push_back(marks[i].amplitude);
      }
      out.push_back(std::move(seq));
    }
    f = g + 1;
  }
  return out;
}

std::optional<double> jitter(std::span<const PeriodSequence> seqs) {
  return mean_relative_difference(seqs, false);
}

std::optional<double> shimmer(std::span<const PeriodSequence> seqs) {
  return mean_relative_difference(seqs, true);
}

std::optional<double> hnr(const AudioClip& clip, const PitchTrack& track) {
  const std::span<const double> x(clip.samples);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < track.frames(); ++f) {
    if (!track.voiced(f)) continue;
    const double lag = track.sample_rate / *track.f0[f];
    const auto k0 = static_cast<int>(std::lround(lag));
    const std::size_t b = f * static_cast<std::size_t>(track.hop);
    if (b + track.frame_len > x.size()) break;
    const auto r = dsp::normalized_autocorrelation(x.subspan(b, track.frame_len), k0 + kSincHalf + 3);
    const int last = static_cast<int>(r.size()) - 1;
    int k = std::clamp(k0, 1, last - 1);
    while (k + 1 < last && r[k + 1] > r[k] && k < k0 + 2) ++k;
    while (k - 1 > 0 && r[k - 1] > r[k] && k > k0 - 2) --k;
    const double peak = refine_peak(r, k);
    const double rc = std::clamp(peak, kHnrClampLo, kHnrClampHi);
    sum += 10.0 * std::log10(rc / (1.0 - rc));
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

}  // namespace ecogvoice::vq
