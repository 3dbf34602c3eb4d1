#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "ecogvoice/learn/binning.hpp"

namespace ecogvoice::learn {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 5;
  int mtry = 0;  // features tried per split; 0 = floor(sqrt(cols))
  int min_samples_leaf = 1;
  bool balanced = true;  // class weights inversely proportional to class frequency
};

// Bagged Gini trees; returns mean-decrease-in-impurity importances
// (each tree normalized to sum 1, then averaged and renormalized).
Eigen::VectorXd forest_importance(const BinnedMatrix& x, std::span<const int> y,
                                  const ForestConfig& config, std::uint64_t seed);

}  // namespace ecogvoice::learn
