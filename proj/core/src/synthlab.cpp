#include "ecogvoice/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ecogvoice/dsp.hpp"
#include "ecogvoice/error.hpp"
#include "ecogvoice/parallel.hpp"
#include "ecogvoice/rng.hpp"

namespace ecogvoice::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// Rosenberg flow derivative with opening phase `tp` and closing phase `tn`.
double flow_derivative(double t, double tp, double tn) {
  if (t < 0.0) return 0.0;
  if (t < tp) return 0.5 * kPi / tp * std::sin(kPi * t / tp);
  if (t < tp + tn) return -0.5 * kPi / tn * std::sin(0.5 * kPi * (t - tp) / tn);
  return 0.0;
}

std::vector<double> perturbation_law(PerturbationLaw law, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  if (law == PerturbationLaw::alternating) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (i % 2 == 0) ? 1.0 : -1.0;
    return out;
  }
  std::uniform_real_distribution<double> step(-0.5, 0.5);
  double level = 0.0;
  for (auto& v : out) {
    level = std::clamp(level + step(rng), -1.0, 1.0);
    v = level;
  }
  return out;
}

}  // namespace

void VoiceSpec::validate() const {
  if (!(f0 >= 75.0 && f0 <= 500.0)) throw std::invalid_argument("f0 must lie in [75, 500] Hz");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (!(jitter_eps >= 0.0 && jitter_eps <= 0.1)) throw std::invalid_argument("jitter_eps out of [0, 0.1]");
  if (!(shimmer_eps >= 0.0 && shimmer_eps <= 0.1)) throw std::invalid_argument("shimmer_eps out of [0, 0.1]");
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
  if (f0 + std::abs(f0_drift) > 0.45 * sample_rate) throw std::invalid_argument("f0 above Nyquist");
  for (const auto& p : formant_poles)
    if (!(p.frequency > 0 && p.frequency < sample_rate / 2.0 && p.bandwidth > 0))
      throw std::invalid_argument("formant pole outside (0, Nyquist)");
}

SynthVoice synth_voice(const VoiceSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, {tag(SeedTag::synth_voice)}));
  const double sr = spec.sample_rate;
  const double voiced_begin = spec.leading_silence;
  const double voiced_end = spec.leading_silence + spec.duration;
  const double total = voiced_end + spec.trailing_silence;
  const auto n = static_cast<std::size_t>(std::llround(total * sr));

  // Pulse shape is tied to the nominal f0 so that a pulse's peak sits at a
  // fixed offset from its onset; perturbations then move marks exactly.
  const double tp = 0.4 / spec.f0;
  const double tn = 0.16 / spec.f0;
  const double max_period = 1.0 / std::max(1.0, spec.f0 - std::abs(spec.f0_drift));
  const std::size_t max_pulses =
      static_cast<std::size_t>(std::ceil(spec.duration / (max_period * 0.8) * 2.0)) + 4;
  const auto jitter_law = perturbation_law(spec.law, max_pulses, rng);
  const auto shimmer_law = perturbation_law(spec.law, max_pulses, rng);

  SynthVoice out;
  double onset = voiced_begin;
  for (std::size_t i = 0; i < max_pulses && onset + tp + tn <= voiced_end; ++i) {
    const double f = spec.f0 + spec.f0_drift * std::sin(2.0 * kPi * spec.drift_rate * (onset - voiced_begin));
    out.pulse_onsets.push_back(onset);
    out.nominal_f0.push_back(f);
    out.pulse_amplitudes.push_back(1.0 + shimmer_law[i] * spec.shimmer_eps);
    const double period = (1.0 / f) * (1.0 + jitter_law[i] * spec.jitter_eps);
    onset += period;
  }
  for (std::size_t i = 0; i + 1 < out.pulse_onsets.size(); ++i)
    out.period_lengths.push_back(out.pulse_onsets[i + 1] - out.pulse_onsets[i]);

  // The closure discontinuity aliases when sampled directly, so the source is
  // rendered oversampled and decimated through the band-limiting resampler.
  constexpr int kOversample = 4;
  const double osr = sr * kOversample;
  AudioClip source;
  source.sample_rate = spec.sample_rate * kOversample;
  source.samples.assign(n * kOversample, 0.0);
  for (std::size_t i = 0; i < out.pulse_onsets.size(); ++i) {
    const double o = out.pulse_onsets[i];
    const auto first = static_cast<std::size_t>(std::ceil(o * osr));
    const auto last =
        std::min(source.samples.size(), static_cast<std::size_t>(std::ceil((o + tp + tn) * osr)));
    for (std::size_t s = first; s < last; ++s)
      source.samples[s] +=
          out.pulse_amplitudes[i] * flow_derivative(static_cast<double>(s) / osr - o, tp, tn);
  }
  std::vector<double> y = dsp::resample(source, spec.sample_rate).samples;
  y.resize(n, 0.0);

  for (const auto& pole : spec.formant_poles) {
    const double r = std::exp(-kPi * pole.bandwidth / sr);
    const double a1 = -2.0 * r * std::cos(2.0 * kPi * pole.frequency / sr);
    const double a2 = r * r;
    const double gain = 1.0 + a1 + a2;
    double y1 = 0.0, y2 = 0.0;
    for (auto& v : y) {
      const double o = gain * v - a1 * y1 - a2 * y2;
      y2 = y1;
      y1 = o;
      v = o;
    }
  }

  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (auto& v : y) v *= spec.peak_level / peak;

  const auto vb = static_cast<std::size_t>(std::llround(voiced_begin * sr));
  const auto ve = std::min(n, static_cast<std::size_t>(std::llround(voiced_end * sr)));
  double power = 0.0;
  for (std::size_t s = vb; s < ve; ++s) power += y[s] * y[s];
  power /= std::max<std::size_t>(1, ve - vb);
  if (std::isfinite(spec.snr_db) && power > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0)));
    for (auto& v : y) v += noise(rng);
  }

  out.clip.sample_rate = spec.sample_rate;
  out.clip.samples = std::move(y);
  return out;
}

std::string feature_for_parameter(const std::string& parameter) {
  if (parameter == "jitter") return "jitter";
  if (parameter == "shimmer") return "shimmer";
  if (parameter == "snr_db") return "hnr";
  if (parameter == "f0_drift") return "pitch_variation";
  if (parameter == "f1") return "f1_mean";
  if (parameter == "f2") return "f2_mean";
  throw std::invalid_argument("unknown voice parameter '" + parameter + "'");
}

std::vector<std::pair<int, std::string>> paper_missing_responses() {
  return {
      {44, "phonemic_fluency"},    {45, "phonemic_fluency"},   {46, "counting_backward"},
      {47, "subtraction"},         {48, "picture_description"}, {49, "dinner_menu"},
      {50, "risk_planning"},       {51, "general_knowledge"},   {51, "risk_planning"},
      {52, "semantic_fluency"},    {52, "phonemic_fluency"},    {52, "picture_description"},
      {53, "counting_backward"},   {53, "subtraction"},         {53, "phonemic_fluency"},
      {53, "childhood_activity"},  {53, "dinner_menu"},         {53, "general_knowledge"},
  };
}

namespace {

ParamDist param_from(const nlohmann::json& j, const char* key, ParamDist fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  return {v.value("mean", fallback.mean), v.value("between_sd", fallback.between_sd),
          v.value("within_sd", fallback.within_sd)};
}

nlohmann::json param_json(const ParamDist& d) {
  return {{"mean", d.mean}, {"between_sd", d.between_sd}, {"within_sd", d.within_sd}};
}

std::string_view missingness_name(Missingness m) {
  switch (m) {
    case Missingness::none: return "none";
    case Missingness::paper: return "paper";
    case Missingness::random: return "random";
  }
  return "none";
}

struct Participant {
  std::string id;
  bool high = false;
  double ecog = 1.0;
  corpus::Sex sex = corpus::Sex::female;
  double age = 0.0, education = 0.0;
  std::map<std::string, double> neuropsych;
  std::map<std::string, double> base;  // voice parameters
};

double clamp_param(const std::string& name, double v) {
  if (name == "jitter" || name == "shimmer") return std::clamp(v, 0.0, 0.1);
  if (name == "f0") return std::clamp(v, 75.0, 500.0);
  if (name == "f0_drift") return std::max(0.0, v);
  if (name == "f1") return std::clamp(v, 200.0, 1000.0);
  if (name == "f2") return std::clamp(v, 700.0, 2900.0);
  if (name == "snr_db") return std::clamp(v, -5.0, 60.0);
  return v;
}

}  // namespace

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
  CorpusSpec s;
  s.n_participants = j.value("n_participants", s.n_participants);
  s.n_high = j.value("n_high", s.n_high);
  s.duration = j.value("duration", s.duration);
  s.silence = j.value("silence", s.silence);
  s.sample_rate = j.value("sample_rate", s.sample_rate);
  s.jitter = param_from(j, "jitter", s.jitter);
  s.shimmer = param_from(j, "shimmer", s.shimmer);
  s.snr_db = param_from(j, "snr_db", s.snr_db);
  s.f0_male = param_from(j, "f0_male", s.f0_male);
  s.f0_female = param_from(j, "f0_female", s.f0_female);
  s.f0_drift = param_from(j, "f0_drift", s.f0_drift);
  s.f1 = param_from(j, "f1", s.f1);
  s.f2 = param_from(j, "f2", s.f2);
  if (j.contains("group_effect"))
    for (const auto& [k, v] : j.at("group_effect").items()) {
      feature_for_parameter(k);
      s.group_effect[k] = v.get<double>();
    }
  s.neuropsych_effect = j.value("neuropsych_effect", s.neuropsych_effect);
  const std::string miss = j.value("missingness", std::string("paper"));
  if (miss == "none") s.missingness = Missingness::none;
  else if (miss == "paper") s.missingness = Missingness::paper;
  else if (miss == "random") s.missingness = Missingness::random;
  else throw std::invalid_argument("missingness must be none, paper or random");
  s.missing_rate = j.value("missing_rate", s.missing_rate);
  s.seed = j.value("seed", s.seed);
  if (s.n_participants < 1 || s.n_high < 0 || s.n_high > s.n_participants)
    throw std::invalid_argument("n_high must lie in [0, n_participants]");
  if (s.missingness == Missingness::paper && s.n_participants < 54)
    throw std::invalid_argument("paper missingness needs at least 54 participants");
  return s;
}

nlohmann::json CorpusSpec::to_json() const {
  nlohmann::json j;
  j["n_participants"] = n_participants;
  j["n_high"] = n_high;
  j["duration"] = duration;
  j["silence"] = silence;
  j["sample_rate"] = sample_rate;
  j["jitter"] = param_json(jitter);
  j["shimmer"] = param_json(shimmer);
  j["snr_db"] = param_json(snr_db);
  j["f0_male"] = param_json(f0_male);
  j["f0_female"] = param_json(f0_female);
  j["f0_drift"] = param_json(f0_drift);
  j["f1"] = param_json(f1);
  j["f2"] = param_json(f2);
  j["group_effect"] = group_effect;
  j["neuropsych_effect"] = neuropsych_effect;
  j["missingness"] = missingness_name(missingness);
  j["missing_rate"] = missing_rate;
  j["seed"] = seed;
  return j;
}

std::filesystem::path synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir,
                                   int jobs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "wav", ec);
  fs::create_directories(out_dir / "truth", ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

  Rng rng(derive_seed(spec.seed, {tag(SeedTag::synth_corpus)}));
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto effect = [&](const std::string& name) {
    auto it = spec.group_effect.find(name);
    return it == spec.group_effect.end() ? 0.0 : it->second;
  };

  std::vector<int> order(spec.n_participants);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> is_high(spec.n_participants, false);
  for (int i = 0; i < spec.n_high; ++i) is_high[order[i]] = true;

  std::vector<Participant> people(spec.n_participants);
  for (int p = 0; p < spec.n_participants; ++p) {
    auto& who = people[p];
    char id[16];
    std::snprintf(id, sizeof id, "P%03d", p + 1);
    who.id = id;
    who.high = is_high[p];
    const double e = who.high ? 1.81 + u(rng) * (3.95 - 1.81) : 1.0 + u(rng) * (1.80 - 1.0);
    who.ecog = std::clamp(std::round(e * 100.0) / 100.0, who.high ? 1.81 : 1.0, who.high ? 3.95 : 1.80);
    who.sex = u(rng) < 0.5 ? corpus::Sex::female : corpus::Sex::male;
    who.age = std::round(std::clamp(76.0 + 6.0 * z(rng), 58.0, 91.0));
    who.education = std::round(std::clamp(12.0 + 3.0 * z(rng), 6.0, 20.0));

    const double g = who.high ? spec.neuropsych_effect : 0.0;
    who.neuropsych["mmse"] = std::round(std::clamp(26.0 + 3.0 * (z(rng) - g), 0.0, 30.0));
    who.neuropsych["fab"] = std::round(std::clamp(14.0 + 2.5 * (z(rng) - g), 0.0, 18.0));
    who.neuropsych["cdt"] = std::round(std::clamp(4.0 + 1.0 * (z(rng) - g), 0.0, 5.0));
    who.neuropsych["lm1"] = std::round(std::clamp(10.0 + 4.0 * (z(rng) - g), 0.0, 25.0));
    who.neuropsych["lm2"] = std::round(std::clamp(8.0 + 4.0 * (z(rng) - g), 0.0, 25.0));
    who.neuropsych["tmta"] = std::round(std::clamp(50.0 + 15.0 * (z(rng) + g), 15.0, 300.0));
    who.neuropsych["tmtb"] = std::round(std::clamp(120.0 + 40.0 * (z(rng) + g), 30.0, 300.0));

    const auto draw = [&](const std::string& name, const ParamDist& d) {
      const double shift = who.high ? effect(name) : 0.0;
      who.base[name] = clamp_param(name, d.mean + d.between_sd * z(rng) + shift);
    };
    draw("f0", who.sex == corpus::Sex::male ? spec.f0_male : spec.f0_female);
    draw("jitter", spec.jitter);
    draw("shimmer", spec.shimmer);
    draw("snr_db", spec.snr_db);
    draw("f0_drift", spec.f0_drift);
    draw("f1", spec.f1);
    draw("f2", spec.f2);
  }

  std::set<std::pair<int, std::string>> missing;
  if (spec.missingness == Missingness::paper) {
    for (const auto& m : paper_missing_responses()) missing.insert(m);
  }

  struct Job {
    int participant;
    std::string question;
    corpus::Condition condition;
    VoiceSpec voice;
  };
  std::vector<Job> todo;
  for (int p = 0; p < spec.n_participants; ++p) {
    const auto& who = people[p];
    auto add = [&](std::string_view q, corpus::Condition c, std::uint64_t qi) {
      const bool drop_random = spec.missingness == Missingness::random && u(rng) < spec.missing_rate;
      VoiceSpec v;
      const auto within = [&](const std::string& name, const ParamDist& d) {
        return clamp_param(name, who.base.at(name) + d.within_sd * z(rng));
      };
      v.f0 = within("f0", who.sex == corpus::Sex::male ? spec.f0_male : spec.f0_female);
      v.jitter_eps = within("jitter", spec.jitter);
      v.shimmer_eps = within("shimmer", spec.shimmer);
      v.snr_db = within("snr_db", spec.snr_db);
      v.f0_drift = within("f0_drift", spec.f0_drift);
      v.formant_poles = {{within("f1", spec.f1), 80.0}, {within("f2", spec.f2), 110.0}};
      v.duration = spec.duration;
      v.leading_silence = spec.silence;
      v.trailing_silence = spec.silence;
      v.sample_rate = spec.sample_rate;
      v.seed = derive_seed(spec.seed, {tag(SeedTag::synth_voice), static_cast<std::uint64_t>(p),
                                       qi});
      if (missing.count({p, std::string(q)}) || drop_random) return;
      todo.push_back({p, std::string(q), c, v});
    };
    std::uint64_t qi = 0;
    for (auto q : corpus::kCognitiveQuestions) add(q, corpus::Condition::cognitive, qi++);
    for (auto q : corpus::kDailyQuestions) add(q, corpus::Condition::daily, qi++);
  }

  std::vector<corpus::ResponseRecord> records(todo.size());
  parallel_for(todo.size(), jobs, [&](std::size_t i) {
    const auto& job = todo[i];
    const auto& who = people[job.participant];
    const std::string stem = who.id + "_" + job.question;
    const auto voice = synth_voice(job.voice);
    corpus::save_wav16(out_dir / "wav" / (stem + ".wav"), voice.clip);

    nlohmann::json truth;
    truth["spec"] = {{"f0", job.voice.f0},
                     {"duration", job.voice.duration},
                     {"jitter_eps", job.voice.jitter_eps},
                     {"shimmer_eps", job.voice.shimmer_eps},
                     {"snr_db", job.voice.snr_db},
                     {"f0_drift", job.voice.f0_drift},
                     {"drift_rate", job.voice.drift_rate},
                     {"formant_poles", nlohmann::json::array()},
                     {"law", job.voice.law == PerturbationLaw::alternating ? "alternating" : "random_walk"},
                     {"seed", job.voice.seed},
                     {"sample_rate", job.voice.sample_rate},
                     {"leading_silence", job.voice.leading_silence},
                     {"trailing_silence", job.voice.trailing_silence}};
    for (const auto& p : job.voice.formant_poles)
      truth["spec"]["formant_poles"].push_back({{"frequency", p.frequency}, {"bandwidth", p.bandwidth}});
    truth["period_lengths"] = voice.period_lengths;
    truth["pulse_amplitudes"] = voice.pulse_amplitudes;
    truth["f0_track"] = voice.nominal_f0;
    std::ofstream(out_dir / "truth" / (stem + ".json")) << truth.dump(1) << '\n';

    auto& rec = records[i];
    rec.participant_id = who.id;
    rec.question_id = job.question;
    rec.condition = job.condition;
    rec.audio_path = out_dir / "wav" / (stem + ".wav");
    rec.ecog_score = who.ecog;
    rec.age = who.age;
    rec.sex = who.sex;
    rec.education = who.education;
    rec.neuropsych = who.neuropsych;
  });

  const auto manifest = out_dir / "manifest.csv";
  corpus::save_manifest(manifest, records, out_dir);

  nlohmann::json truth;
  truth["spec"] = spec.to_json();
  truth["injected_features"] = nlohmann::json::array();
  for (const auto& [k, v] : spec.group_effect)
    if (v != 0.0) truth["injected_features"].push_back(feature_for_parameter(k));
  for (const auto& who : people)
    truth["participants"].push_back({{"participant_id", who.id},
                                     {"group", who.high ? "high" : "low"},
                                     {"ecog", who.ecog},
                                     {"voice", who.base}});
  std::ofstream(out_dir / "corpus_truth.json") << truth.dump(1) << '\n';
  return manifest;
}

}  // namespace ecogvoice::synth
