#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ecogvoice/corpus.hpp"

namespace ecogvoice::dsp {

using corpus::AudioClip;

// Frame-level matrix: one row per analysis frame.
struct FrameSeries {
  Eigen::MatrixXd values;  // frames x coefficients
  int frame_len = 0;
  int hop = 0;
  int sample_rate = 0;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index coefficients() const { return values.cols(); }
};

// floor((n - frame_len) / hop) + 1 for n >= frame_len, else 0.
std::size_t frame_count(std::size_t n_samples, int frame_len, int hop);

struct MfccConfig {
  int n_coeffs = 12;  // DCT coefficients 0..n_coeffs-1
  int n_mels = 26;
  int fft_size = 0;   // 0: next power of two >= frame length
  double preemphasis = 0.97;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
};

// Pre-emphasis, periodic Hann window, |FFT|^2, triangular HTK-mel filterbank
// over 0..Nyquist, natural log (floored at 1e-10), orthonormal DCT-II.
// Throws std::invalid_argument when the clip is shorter than one frame.
FrameSeries mfcc(const AudioClip& clip, const MfccConfig& config = {});

// Triangular mel filterbank, n_mels x (fft_size/2 + 1).
Eigen::MatrixXd mel_filterbank(int n_mels, int fft_size, int sample_rate);

struct SgConfig {
  int window = 9;
  int polyorder = 2;
};

// Savitzky-Golay convolution weights for the `deriv`-th derivative at the
// window centre, unit sample spacing. Index 0 is offset -(window-1)/2.
std::vector<double> savgol_coefficients(int window, int polyorder, int deriv);

// Per-column Savitzky-Golay derivative along the frame axis; frames beyond the
// edges are replicated. Order must be 1 or 2 (std::invalid_argument otherwise).
FrameSeries sg_derivative(const FrameSeries& series, int order, const SgConfig& config = {});

struct PitchConfig {
  double fmin = 75.0;
  double fmax = 500.0;
  double voicing_threshold = 0.45;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double silence_drop_db = 35.0;  // energy gate relative to the loudest frame
  double floor_dbfs = -90.0;
  // Shortest-lag peak within this fraction of the best peak wins (octave guard).
  double octave_ratio = 0.9;
  // A voiced frame whose f0 is off the median of the voiced frames within
  // +-jump_window frames by more than jump_ratio is set unvoiced; 0 disables.
  int jump_window = 5;
  double jump_ratio = 1.3;
};

struct PitchTrack {
  std::vector<std::optional<double>> f0;  // Hz, nullopt when unvoiced
  std::vector<double> strength;           // normalized autocorrelation at the chosen lag
  int frame_len = 0;
  int hop = 0;
  int sample_rate = 0;

  std::size_t frames() const { return f0.size(); }
  bool voiced(std::size_t i) const { return f0[i].has_value(); }
  double voiced_fraction() const;
};

// Normalized cross-correlation of a frame with its own lagged copy,
// r(k) = sum x[n]x[n+k] / sqrt(sum x[n]^2 * sum x[n+k]^2) over the overlap,
// for k = 0..max_lag. The frame mean is removed first.
std::vector<double> normalized_autocorrelation(std::span<const double> frame, int max_lag);

PitchTrack pitch_track(const AudioClip& clip, const PitchConfig& config = {});

struct FormantConfig {
  int lpc_order = 12;
  int analysis_rate = 10000;
  double preemphasis = 0.97;
  double max_bandwidth = 400.0;
  double f1_lo = 90.0, f1_hi = 1000.0;
  double f2_lo = 600.0, f2_hi = 3000.0;
};

struct FormantEstimate {
  double f1_mean = 0.0;
  double f2_mean = 0.0;
  std::size_t frames_used = 0;
};

// Mean F1/F2 over voiced frames with both candidates present; nullopt when no
// voiced frame yields both.
std::optional<FormantEstimate> formants(const AudioClip& clip, const PitchTrack& track,
                                        const FormantConfig& config = {});

// Windowed-sinc resampler.
AudioClip resample(const AudioClip& clip, int target_rate);

// Levinson-Durbin on the autocorrelation of `frame`; returns a[0..order] with a[0] = 1.
std::vector<double> lpc(std::span<const double> frame, int order);

struct Resonance {
  double frequency;  // Hz
  double bandwidth;  // Hz
};

// Upper-half-plane roots of the LPC polynomial as resonances, ascending in frequency.
std::vector<Resonance> lpc_resonances(std::span<const double> a, int sample_rate);

}  // namespace ecogvoice::dsp
