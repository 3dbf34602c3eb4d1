#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecogvoice/learn/folds.hpp"
#include "ecogvoice/learn/nested_cv.hpp"

namespace ecogvoice::learn {

struct EvalReport {
  std::string condition;
  std::size_t n_rows = 0;
  std::size_t n_participants = 0;
  std::size_t n_high_rows = 0;
  std::uint64_t seed = 0;
  int budget = 0;
  std::vector<std::string> feature_names;
  FoldPlan plan;
  std::vector<AlgorithmReport> algorithms;

  // Share of rows in the larger class, percent.
  double majority_rate() const;
  // Highest pooled accuracy; earliest wins ties. nullptr when empty.
  const AlgorithmReport* best() const;
  const AlgorithmReport* find(Algorithm a) const;

  nlohmann::json to_json() const;
  // Recomputes metrics from the stored confusion counts and checks that the
  // pooled counts equal the per-fold sums; DataError otherwise.
  static EvalReport from_json(const nlohmann::json& j);

  // algorithm,accuracy,sensitivity,specificity,f1 with one decimal.
  void write_summary_csv(const std::filesystem::path& path) const;
};

EvalReport make_report(const features::Dataset& ds, const FoldPlan& plan, std::uint64_t seed, int budget,
                       std::vector<AlgorithmReport> algorithms);

nlohmann::json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace ecogvoice::learn
