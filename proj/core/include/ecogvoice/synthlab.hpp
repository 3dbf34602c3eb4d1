#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecogvoice/corpus.hpp"

namespace ecogvoice::synth {

using corpus::AudioClip;

struct FormantPole {
  double frequency;  // Hz
  double bandwidth;  // Hz
};

enum class PerturbationLaw { alternating, random_walk };

struct VoiceSpec {
  double f0 = 120.0;            // Hz, nominal
  double duration = 2.0;        // s of voiced signal
  double jitter_eps = 0.0;
  double shimmer_eps = 0.0;
  double snr_db = 60.0;
  std::vector<FormantPole> formant_poles;
  double f0_drift = 0.0;        // Hz, amplitude of the slow sinusoidal f0 excursion
  double drift_rate = 1.0;      // Hz
  PerturbationLaw law = PerturbationLaw::alternating;
  std::uint64_t seed = 0;
  int sample_rate = 44100;
  double leading_silence = 0.0;   // s
  double trailing_silence = 0.0;  // s
  double peak_level = 0.3;

  // Throws std::invalid_argument when out of domain (f0 in [75, 500],
  // duration > 0, eps in [0, 0.1]).
  void validate() const;
};

struct SynthVoice {
  AudioClip clip;
  std::vector<double> pulse_onsets;       // s
  std::vector<double> period_lengths;     // s, onset[i+1] - onset[i]
  std::vector<double> pulse_amplitudes;   // relative source amplitude per pulse
  std::vector<double> nominal_f0;         // Hz, drifted f0 at each pulse
};

// Rosenberg glottal-flow-derivative pulse train with per-cycle period and
// amplitude perturbation, all-pole formant cascade and additive white noise.
SynthVoice synth_voice(const VoiceSpec& spec);

// Between- and within-participant spread of one voice parameter.
struct ParamDist {
  double mean = 0.0;
  double between_sd = 0.0;
  double within_sd = 0.0;
};

enum class Missingness { none, paper, random };

struct CorpusSpec {
  int n_participants = 54;
  int n_high = 32;
  double duration = 2.0;     // voiced seconds per response
  double silence = 0.3;      // leading and trailing silence per response
  int sample_rate = 44100;
  ParamDist jitter{0.006, 0.0015, 0.0005};
  ParamDist shimmer{0.03, 0.006, 0.002};
  ParamDist snr_db{22.0, 3.0, 1.0};
  ParamDist f0_male{120.0, 12.0, 3.0};
  ParamDist f0_female{200.0, 18.0, 4.0};
  ParamDist f0_drift{6.0, 2.0, 1.0};
  ParamDist f1{550.0, 40.0, 15.0};
  ParamDist f2{1500.0, 100.0, 30.0};
  // Shift applied to high-group participants, keyed by parameter name:
  // jitter, shimmer, snr_db, f0_drift, f1, f2.
  std::map<std::string, double> group_effect;
  // Shift of the neuropsychological scores for the high group, in SD units.
  double neuropsych_effect = 0.5;
  Missingness missingness = Missingness::paper;
  double missing_rate = 0.0;  // for Missingness::random
  std::uint64_t seed = 1;

  static CorpusSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Feature-table column most directly driven by a voice parameter.
std::string feature_for_parameter(const std::string& parameter);

// Writes wav/<pid>_<qid>.wav, truth/<pid>_<qid>.json, manifest.csv and
// corpus_truth.json under out_dir. Returns the manifest path.
std::filesystem::path synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir,
                                   int jobs = 1);

// (participant index, question id) pairs that are absent under the
// paper-shaped missingness pattern: 11 cognitive and 7 daily absences spread
// over 10 of 54 participants.
std::vector<std::pair<int, std::string>> paper_missing_responses();

}  // namespace ecogvoice::synth
