#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecogvoice/features.hpp"

namespace ecogvoice::learn {

using ParticipantFolds = std::vector<std::vector<std::string>>;

// Subject-wise stratified 10x3 plan over participant ids.
struct FoldPlan {
  ParticipantFolds outer;               // test participants per outer fold
  std::vector<ParticipantFolds> inner;  // per outer fold, partition of its training participants
  std::uint64_t seed = 0;

  std::size_t n_outer() const { return outer.size(); }

  nlohmann::json to_json() const;
  static FoldPlan from_json(const nlohmann::json& j);

  // Throws DataError unless the folds partition exactly the dataset's
  // participants and every inner split partitions its outer training set.
  void validate(const features::Dataset& ds) const;
};

// Participant -> group label (1 = high); DataError when a participant's rows disagree.
std::map<std::string, int> participant_labels(const features::Dataset& ds);

// Shuffles high and low participants separately and deals them round-robin,
// lows continuing where highs stopped, so each fold's class counts differ
// from proportional by at most one. Throws DataError with fewer participants
// than folds or a missing class.
FoldPlan make_fold_plan(const features::Dataset& ds, std::uint64_t seed, int n_outer = 10, int n_inner = 3);

// Row indices of the dataset belonging to the given participants, ascending.
std::vector<std::size_t> rows_of(const features::Dataset& ds, const std::vector<std::string>& participants);

}  // namespace ecogvoice::learn
