#include <benchmark/benchmark.h>

#include "ecogvoice/dsp.hpp"
#include "ecogvoice/features.hpp"
#include "ecogvoice/synthlab.hpp"
#include "ecogvoice/voicequality.hpp"

using namespace ecogvoice;

namespace {

const synth::SynthVoice& voice() {
  static const synth::SynthVoice v = [] {
    synth::VoiceSpec s;
    s.f0 = 140.0;
    s.jitter_eps = 0.01;
    s.shimmer_eps = 0.03;
    s.snr_db = 20.0;
    s.formant_poles = {{550.0, 80.0}, {1500.0, 100.0}};
    s.duration = 2.0;
    return synth::synth_voice(s);
  }();
  return v;
}

}  // namespace

static void BM_Mfcc(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dsp::mfcc(voice().clip));
}
BENCHMARK(BM_Mfcc)->Unit(benchmark::kMillisecond);

static void BM_PitchTrack(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dsp::pitch_track(voice().clip));
}
BENCHMARK(BM_PitchTrack)->Unit(benchmark::kMillisecond);

static void BM_Formants(benchmark::State& state) {
  auto track = dsp::pitch_track(voice().clip);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::formants(voice().clip, track));
}
BENCHMARK(BM_Formants)->Unit(benchmark::kMillisecond);

static void BM_Hnr(benchmark::State& state) {
  auto track = dsp::pitch_track(voice().clip);
  for (auto _ : state) benchmark::DoNotOptimize(vq::hnr(voice().clip, track));
}
BENCHMARK(BM_Hnr)->Unit(benchmark::kMillisecond);

static void BM_ExtractClip(benchmark::State& state) {
  corpus::ResponseRecord rec;
  rec.participant_id = "P1";
  rec.question_id = "C1";
  rec.ecog_score = 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(features::extract_from_clip(rec, voice().clip));
}
BENCHMARK(BM_ExtractClip)->Unit(benchmark::kMillisecond);

static void BM_SynthVoice(benchmark::State& state) {
  synth::VoiceSpec s;
  s.formant_poles = {{550.0, 80.0}, {1500.0, 100.0}};
  s.jitter_eps = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(synth::synth_voice(s));
}
BENCHMARK(BM_SynthVoice)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
