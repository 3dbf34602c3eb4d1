#include "ecogvoice/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace ecogvoice::dsp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogFloor = 1e-10;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> preemphasize(std::span<const double> x, double alpha) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) y[i] = x[i] - alpha * x[i - 1];
  return y;
}

std::vector<double> frame_levels_db(std::span<const double> x, int frame_len, int hop,
                                    std::size_t n_frames) {
  std::vector<double> db(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    double ss = 0.0;
    const std::size_t b = f * static_cast<std::size_t>(hop);
    for (int i = 0; i < frame_len; ++i) ss += x[b + i] * x[b + i];
    const double rms = std::sqrt(ss / frame_len);
    db[f] = rms > 0 ? 20.0 * std::log10(rms) : -std::numeric_limits<double>::infinity();
  }
  return db;
}

}  // namespace

std::size_t frame_count(std::size_t n_samples, int frame_len, int hop) {
  if (frame_len <= 0 || hop <= 0 || n_samples < static_cast<std::size_t>(frame_len)) return 0;
  return (n_samples - static_cast<std::size_t>(frame_len)) / static_cast<std::size_t>(hop) + 1;
}

Eigen::MatrixXd mel_filterbank(int n_mels, int fft_size, int sample_rate) {
  const int n_bins = fft_size / 2 + 1;
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / (n_mels + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      if (f > lo && f < hi) fb(m, k) = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
    }
  }
  return fb;
}

FrameSeries mfcc(const AudioClip& clip, const MfccConfig& config) {
  const int sr = clip.sample_rate;
  const int frame_len = corpus::samples_for_ms(config.frame_ms, sr);
  const int hop = corpus::samples_for_ms(config.hop_ms, sr);
  const std::size_t n_frames = frame_count(clip.samples.size(), frame_len, hop);
  if (n_frames == 0) throw std::invalid_argument("clip shorter than one analysis frame");
  if (config.n_coeffs < 1 || config.n_coeffs > config.n_mels)
    throw std::invalid_argument("n_coeffs must be in [1, n_mels]");
  const int nfft = config.fft_size > 0 ? config.fft_size : next_pow2(frame_len);
  if (nfft < frame_len) throw std::invalid_argument("fft_size shorter than the frame");

  const Eigen::MatrixXd fb = mel_filterbank(config.n_mels, nfft, sr);
  const auto emph = preemphasize(clip.samples, config.preemphasis);

  std::vector<double> window(frame_len);
  for (int i = 0; i < frame_len; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / frame_len);

  Eigen::MatrixXd dct(config.n_coeffs, config.n_mels);
  for (int k = 0; k < config.n_coeffs; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / config.n_mels) : std::sqrt(2.0 / config.n_mels);
    for (int m = 0; m < config.n_mels; ++m)
      dct(k, m) = s * std::cos(kPi * k * (m + 0.5) / config.n_mels);
  }

  FrameSeries out;
  out.values.resize(static_cast<Eigen::Index>(n_frames), config.n_coeffs);
  out.frame_len = frame_len;
  out.hop = hop;
  out.sample_rate = sr;

  Eigen::FFT<double> fft;
  std::vector<double> buf(nfft);
  std::vector<std::complex<double>> spec;
  Eigen::VectorXd power(nfft / 2 + 1);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::fill(buf.begin(), buf.end(), 0.0);
    const std::size_t b = f * static_cast<std::size_t>(hop);
    for (int i = 0; i < frame_len; ++i) buf[i] = emph[b + i] * window[i];
    fft.fwd(spec, buf);
    for (int k = 0; k <= nfft / 2; ++k) power(k) = std::norm(spec[k]);
    Eigen::VectorXd logmel = fb * power;
    for (auto& v : logmel) v = std::log(std::max(v, kLogFloor));
    out.values.row(static_cast<Eigen::Index>(f)) = (dct * logmel).transpose();
  }
  return out;
}

std::vector<double> savgol_coefficients(int window, int polyorder, int deriv) {
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("SG window must be odd and >= 3");
  if (polyorder >= window) throw std::invalid_argument("SG polyorder must be < window");
  if (deriv < 0 || deriv > polyorder) throw std::invalid_argument("SG derivative exceeds polyorder");
  const int half = window / 2;
  Eigen::MatrixXd a(window, polyorder + 1);
  for (int i = 0; i < window; ++i)
    for (int j = 0; j <= polyorder; ++j) a(i, j) = std::pow(static_cast<double>(i - half), j);
  // Row `deriv` of the least-squares projector gives the polynomial coefficient.
  const Eigen::MatrixXd pinv = (a.transpose() * a).ldlt().solve(a.transpose());
  double factorial = 1.0;
  for (int k = 2; k <= deriv; ++k) factorial *= k;
  std::vector<double> c(window);
  for (int i = 0; i < window; ++i) c[i] = pinv(deriv, i) * factorial;
  return c;
}

FrameSeries sg_derivative(const FrameSeries& series, int order, const SgConfig& config) {
  if (order != 1 && order != 2) throw std::invalid_argument("SG derivative order must be 1 or 2");
  const auto c = savgol_coefficients(config.window, config.polyorder, order);
  const int half = config.window / 2;
  const Eigen::Index n = series.frames();
  FrameSeries out = series;
  if (n == 0) return out;
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < series.coefficients(); ++j) {
      double acc = 0.0;
      for (int i = 0; i < config.window; ++i) {
        const Eigen::Index src = std::clamp<Eigen::Index>(t + i - half, 0, n - 1);
        acc += c[i] * series.values(src, j);
      }
      out.values(t, j) = acc;
    }
  }
  return out;
}

double PitchTrack::voiced_fraction() const {
  if (f0.empty()) return 0.0;
  const auto v = std::count_if(f0.begin(), f0.end(), [](const auto& x) { return x.has_value(); });
  return static_cast<double>(v) / static_cast<double>(f0.size());
}

std::vector<double> normalized_autocorrelation(std::span<const double> frame, int max_lag) {
  const int n = static_cast<int>(frame.size());
  max_lag = std::min(max_lag, n - 1);
  std::vector<double> r(static_cast<std::size_t>(std::max(0, max_lag + 1)), 0.0);
  if (n == 0 || max_lag < 0) return r;

  double mean = 0.0;
  for (double v : frame) mean += v;
  mean /= n;
  const int nfft = next_pow2(n + max_lag + 1);
  std::vector<double> x(nfft, 0.0);
  for (int i = 0; i < n; ++i) x[i] = frame[i] - mean;

  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, x);
  for (auto& s : spec) s = std::norm(s);
  std::vector<double> acf;
  fft.inv(acf, spec);

  for (int k = 0; k <= max_lag; ++k) {
    const double e0 = prefix[n - k];
    const double e1 = prefix[n] - prefix[k];
    const double d = std::sqrt(e0 * e1);
    r[k] = d > 0 ? acf[k] / d : 0.0;
  }
  return r;
}

PitchTrack pitch_track(const AudioClip& clip, const PitchConfig& config) {
  PitchTrack track;
  const int sr = clip.sample_rate;
  track.sample_rate = sr;
  track.frame_len = corpus::samples_for_ms(config.frame_ms, sr);
  track.hop = corpus::samples_for_ms(config.hop_ms, sr);
  const std::size_t n_frames = frame_count(clip.samples.size(), track.frame_len, track.hop);
  track.f0.assign(n_frames, std::nullopt);
  track.strength.assign(n_frames, 0.0);
  if (n_frames == 0) return track;

  const int min_lag = std::max(2, static_cast<int>(std::floor(sr / config.fmax)));
  const int max_lag = std::min(track.frame_len - 2, static_cast<int>(std::ceil(sr / config.fmin)));
  if (max_lag <= min_lag) return track;

  const auto level = frame_levels_db(clip.samples, track.frame_len, track.hop, n_frames);
  const double loudest = *std::max_element(level.begin(), level.end());
  const double gate = std::max(loudest - config.silence_drop_db, config.floor_dbfs);

  const std::span<const double> x(clip.samples);
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (!(level[f] > gate)) continue;
    const auto r = normalized_autocorrelation(
        x.subspan(f * static_cast<std::size_t>(track.hop), static_cast<std::size_t>(track.frame_len)),
        max_lag + 1);
    double best = -1.0;
    for (int k = min_lag; k <= max_lag; ++k)
      if (r[k] > r[k - 1] && r[k] >= r[k + 1]) best = std::max(best, r[k]);
    if (best <= 0.0) continue;
    int lag = -1;
    for (int k = min_lag; k <= max_lag; ++k) {
      if (r[k] > r[k - 1] && r[k] >= r[k + 1] && r[k] >= config.octave_ratio * best) {
        lag = k;
        break;
      }
    }
    const double y0 = r[lag - 1], y1 = r[lag], y2 = r[lag + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    const double delta = denom < 0 ? 0.5 * (y0 - y2) / denom : 0.0;
    const double peak = y1 - 0.25 * (y0 - y2) * delta;
    const double f0 = sr / (lag + delta);
    track.strength[f] = peak;
    if (peak >= config.voicing_threshold && f0 >= config.fmin && f0 <= config.fmax)
      track.f0[f] = f0;
  }

  if (config.jump_window > 0 && config.jump_ratio > 1.0) {
    const auto raw = track.f0;
    const auto w = static_cast<std::size_t>(config.jump_window);
    std::vector<double> near;
    for (std::size_t f = 0; f < n_frames; ++f) {
      if (!raw[f]) continue;
      near.clear();
      for (std::size_t g = f > w ? f - w : 0; g <= std::min(n_frames - 1, f + w); ++g)
        if (g != f && raw[g]) near.push_back(*raw[g]);
      if (near.size() < 3) continue;
      auto mid = near.begin() + static_cast<std::ptrdiff_t>(near.size() / 2);
      std::nth_element(near.begin(), mid, near.end());
      const double ratio = *raw[f] / *mid;
      if (ratio > config.jump_ratio || ratio < 1.0 / config.jump_ratio) track.f0[f] = std::nullopt;
    }
  }
  return track;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate == clip.sample_rate) return clip;
  if (target_rate <= 0 || clip.sample_rate <= 0) throw std::invalid_argument("sample rates must be positive");
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  const double cutoff = 0.5 * std::min(1.0, ratio) * 0.95;  // cycles per input sample
  const int half_width = static_cast<int>(std::ceil(8.0 / cutoff));
  const auto n_in = static_cast<std::ptrdiff_t>(clip.samples.size());
  const auto n_out = static_cast<std::size_t>(std::floor(n_in * ratio));

  // Output m sits at input position m * in / out; its fractional part cycles
  // through `phases` values, so kernels are built once per phase.
  const std::int64_t g = std::gcd(clip.sample_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = clip.sample_rate / g;
  const int taps = 2 * half_width;
  std::vector<double> table(static_cast<std::size_t>(up) * taps);
  for (std::int64_t ph = 0; ph < up; ++ph) {
    const double frac = static_cast<double>(ph) / static_cast<double>(up);
    double* w = &table[static_cast<std::size_t>(ph) * taps];
    double wsum = 0.0;
    for (int t = 0; t < taps; ++t) {
      const double u = frac + static_cast<double>(half_width - 1 - t);
      double v = 0.0;
      if (std::abs(u) < half_width) {
        const double arg = 2.0 * cutoff * u;
        const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
        v = 2.0 * cutoff * sinc * (0.5 + 0.5 * std::cos(kPi * u / half_width));
      }
      w[t] = v;
      wsum += v;
    }
    if (wsum != 0.0)
      for (int t = 0; t < taps; ++t) w[t] /= wsum;
  }

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (std::size_t m = 0; m < n_out; ++m) {
    const std::int64_t num = static_cast<std::int64_t>(m) * down;
    const auto centre = static_cast<std::ptrdiff_t>(num / up);
    const double* w = &table[static_cast<std::size_t>(num % up) * taps];
    const std::ptrdiff_t first = centre - half_width + 1;
    double acc = 0.0;
    for (int t = 0; t < taps; ++t) {
      const std::ptrdiff_t i = first + t;
      if (i >= 0 && i < n_in) acc += w[t] * clip.samples[static_cast<std::size_t>(i)];
    }
    out.samples[m] = acc;
  }
  return out;
}

std::vector<double> lpc(std::span<const double> frame, int order) {
  std::vector<double> r(order + 1, 0.0);
  const std::size_t n = frame.size();
  for (int k = 0; k <= order; ++k)
    for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i) r[k] += frame[i] * frame[i - k];

  std::vector<double> a(order + 1, 0.0);
  a[0] = 1.0;
  if (r[0] <= 0.0) return a;
  double err = r[0];
  std::vector<double> prev(order + 1);
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
    if (err <= 0.0) break;
  }
  return a;
}

std::vector<Resonance> lpc_resonances(std::span<const double> a, int sample_rate) {
  const int p = static_cast<int>(a.size()) - 1;
  std::vector<Resonance> out;
  if (p < 1) return out;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) companion(0, j) = -a[j + 1];
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return out;
  for (const auto& z : solver.eigenvalues()) {
    if (z.imag() <= 0.0) continue;
    const double mag = std::abs(z);
    if (mag <= 0.0) continue;
    out.push_back({std::arg(z) * sample_rate / (2.0 * kPi), -std::log(mag) * sample_rate / kPi});
  }
  std::sort(out.begin(), out.end(),
            [](const Resonance& l, const Resonance& r) { return l.frequency < r.frequency; });
  return out;
}

std::optional<FormantEstimate> formants(const AudioClip& clip, const PitchTrack& track,
                                        const FormantConfig& config) {
  if (track.frames() == 0 || track.sample_rate <= 0) return std::nullopt;
  const AudioClip low = resample(clip, config.analysis_rate);
  const auto emph = preemphasize(low.samples, config.preemphasis);
  const double scale = static_cast<double>(config.analysis_rate) / track.sample_rate;
  const auto len = static_cast<std::size_t>(std::lround(track.frame_len * scale));
  if (len <= static_cast<std::size_t>(config.lpc_order)) return std::nullopt;

  std::vector<double> hamming(len);
  for (std::size_t i = 0; i < len; ++i)
    hamming[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / (len - 1));

  double f1_sum = 0.0, f2_sum = 0.0;
  std::size_t used = 0;
  std::vector<double> frame(len);
  for (std::size_t f = 0; f < track.frames(); ++f) {
    if (!track.voiced(f)) continue;
    const auto start = static_cast<std::size_t>(std::lround(f * track.hop * scale));
    if (start + len > emph.size()) break;
    for (std::size_t i = 0; i < len; ++i) frame[i] = emph[start + i] * hamming[i];
    const auto a = lpc(frame, config.lpc_order);
    const auto res = lpc_resonances(a, config.analysis_rate);

    std::optional<double> f1, f2;
    std::size_t i = 0;
    for (; i < res.size(); ++i) {
      if (res[i].bandwidth >= config.max_bandwidth) continue;
      if (res[i].frequency >= config.f1_lo && res[i].frequency <= config.f1_hi) {
        f1 = res[i].frequency;
        break;
      }
    }
    for (++i; f1 && i < res.size(); ++i) {
      if (res[i].bandwidth >= config.max_bandwidth) continue;
      if (res[i].frequency >= config.f2_lo && res[i].frequency <= config.f2_hi) {
        f2 = res[i].frequency;
        break;
      }
    }
    if (f1 && f2) {
      f1_sum += *f1;
      f2_sum += *f2;
      ++used;
    }
  }
  if (used == 0) return std::nullopt;
  return FormantEstimate{f1_sum / used, f2_sum / used, used};
}

}  // namespace ecogvoice::dsp
