#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ecogvoice::learn {

struct BorutaConfig {
  double percentile = 100.0;  // shadow-importance percentile a hit must beat
  int n_trees = 100;
  int max_iter = 100;         // at least 20
  double alpha = 0.05;
  int max_depth = 5;
  int max_bins = 64;
};

enum class BorutaDecision { tentative, confirmed, rejected };

struct BorutaResult {
  std::vector<std::size_t> confirmed;  // ascending column indices
  std::vector<BorutaDecision> decisions;
  std::vector<int> hits;
  int iterations = 0;
};

// All-relevant selection: each round fits a forest on the still-undecided and
// confirmed columns plus a value-permuted shadow of every column, counts a hit when a
// column's importance beats the shadow percentile, and decides columns with a
// binomial test (Benjamini-Hochberg across columns, then Bonferroni across
// rounds). Columns still tentative after max_iter are confirmed when their
// median importance exceeds the median shadow threshold.
BorutaResult boruta_select(const Eigen::MatrixXd& x, std::span<const int> y, const BorutaConfig& config,
                           std::uint64_t seed);

}  // namespace ecogvoice::learn
