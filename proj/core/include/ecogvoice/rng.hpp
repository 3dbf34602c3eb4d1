#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ecogvoice {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a tuple of tags
// (fold index, trial index, ...). Every random consumer in the pipeline gets
// its seed this way so results do not depend on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(base);
  for (auto t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

// Tags for derive_seed that name a pipeline stage.
enum class SeedTag : std::uint64_t {
  fold_plan = 1,
  inner_plan,
  tpe,
  boruta,
  fit_inner,
  fit_final,
  shapley,
  background,
  synth_voice,
  synth_corpus,
};

constexpr std::uint64_t tag(SeedTag t) { return static_cast<std::uint64_t>(t); }

}  // namespace ecogvoice
