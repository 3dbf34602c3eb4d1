#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ecogvoice/learn/hyperspace.hpp"
#include "ecogvoice/rng.hpp"

namespace ecogvoice::learn {

struct TpeConfig {
  int n_startup = 10;
  double gamma = 0.25;
  int n_candidates = 24;
  double prior_weight = 1.0;
};

struct Trial {
  HyperConfig config;
  double loss = 0.0;
};

// Independent uniform draw from every domain.
HyperConfig sample_random(const HyperSpace& space, Rng& rng);

// Point `index` of a randomly shifted Halton sequence mapped into the space.
HyperConfig sample_startup(const HyperSpace& space, std::size_t index, std::uint64_t seed);

// Next configuration to evaluate. Below n_startup observations this is the
// quasi-random startup point; afterwards the candidate with the best
// good/bad density ratio. Deterministic in (history, space, seed).
HyperConfig tpe_suggest(std::span<const Trial> history, const HyperSpace& space, std::uint64_t seed,
                        const TpeConfig& config = {});

// Sequential minimization: objective(config, trial_index) -> loss.
std::vector<Trial> tpe_minimize(const HyperSpace& space,
                                const std::function<double(const HyperConfig&, int)>& objective,
                                int n_trials, std::uint64_t seed, const TpeConfig& config = {});

// Index of the lowest loss; earliest wins ties.
std::size_t best_trial(std::span<const Trial> trials);

}  // namespace ecogvoice::learn
