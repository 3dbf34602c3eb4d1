#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ecogvoice/features.hpp"
#include "ecogvoice/learn/nested_cv.hpp"
#include "ecogvoice/learn/report.hpp"

namespace ecogvoice::explain {

struct FeatureFrequency {
  std::string name;
  double frequency = 0.0;  // folds selecting / total folds
  bool robust = false;     // frequency > 0.5
};

// Sorted by descending frequency; ties keep the order of `names`.
std::vector<FeatureFrequency> selection_frequency(const std::vector<std::vector<std::string>>& per_fold,
                                                  const std::vector<std::string>& names);
std::vector<FeatureFrequency> selection_frequency(const learn::AlgorithmReport& report,
                                                  const std::vector<std::string>& names);

// Batch model output for full-width rows.
using ModelFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct ShapleyConfig {
  int n_permutations = 200;  // at least 50; used in antithetic pairs
};

struct ShapleyResult {
  Eigen::MatrixXd values;     // samples x features; exactly 0 outside the subset
  Eigen::MatrixXd std_error;  // Monte Carlo standard error per cell
  Eigen::VectorXd output;     // f(x) per sample
  Eigen::VectorXd local_error_se;  // standard error of sum(values) + base - f(x)
  double base_value = 0.0;    // mean f over the background rows
};

// Permutation-sampling Shapley values over the features in `subset`:
// features absent from a coalition take a background row's values. Each
// permutation is paired with its reverse, and background rows are cycled
// so that with n_permutations = 2 * rows(background) every row is used
// equally and local accuracy is exact up to rounding.
ShapleyResult shapley_values(const ModelFn& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& background,
                             std::span<const std::size_t> subset, const ShapleyConfig& config, std::uint64_t seed,
                             int jobs = 1);

struct ImportanceReport {
  std::string condition;
  learn::Algorithm algorithm = learn::Algorithm::knn;
  std::vector<std::string> feature_names;
  std::vector<FeatureFrequency> frequency;
  std::vector<std::string> participants;  // per attributed row
  std::vector<std::string> questions;
  Eigen::MatrixXd shapley;                // rows x features
  Eigen::VectorXd output;                 // model output per row
  Eigen::VectorXd base;                   // base value of the row's fold model
  Eigen::VectorXd mean_abs;               // mean |Shapley| per feature over all rows

  // (feature, mean |Shapley|) by descending value; ties keep feature order.
  std::vector<std::pair<std::string, double>> ranking() const;
  std::vector<std::string> robust_features() const;

  nlohmann::json to_json() const;
  // One row per feature, one column per attributed sample.
  void write_attribution_csv(const std::filesystem::path& path) const;
};

struct ExplainConfig {
  ShapleyConfig shapley;
  int background_rows = 100;  // sampled from each outer fold's training rows
  std::uint64_t seed = 0;     // background sampling and permutations
  int jobs = 1;
};

// Refits each outer fold's final model from the report's chosen
// configuration (with `cv`, whose seed must be the report's) and attributes
// its test rows. Throws DataError when the
// refit does not reproduce the stored predictions (features or config differ).
ImportanceReport explain_report(const features::Dataset& ds, const learn::EvalReport& report,
                                learn::Algorithm algorithm, const learn::NestedCvConfig& cv,
                                const ExplainConfig& config);

struct CommonFeatures {
  std::vector<std::string> common;  // robust in both, in order of list a
  double fraction_a = 0.0;          // share of a's robust mean |Shapley| held by common features
  double fraction_b = 0.0;
};

// `robust_*` are robust feature names, `importance_*` their mean |Shapley|
// keyed by name.
CommonFeatures common_features(const std::vector<std::string>& robust_a,
                               const std::vector<std::pair<std::string, double>>& importance_a,
                               const std::vector<std::string>& robust_b,
                               const std::vector<std::pair<std::string, double>>& importance_b);

}  // namespace ecogvoice::explain
