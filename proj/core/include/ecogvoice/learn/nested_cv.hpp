#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ecogvoice/features.hpp"
#include "ecogvoice/learn/boruta.hpp"
#include "ecogvoice/learn/folds.hpp"
#include "ecogvoice/learn/hyperspace.hpp"
#include "ecogvoice/learn/metrics.hpp"
#include "ecogvoice/learn/models.hpp"
#include "ecogvoice/learn/tpe.hpp"

namespace ecogvoice::learn {

enum class Phase { imputation, standardization, selection, tuning, fitting, evaluation };
std::string_view to_string(Phase p);

// Receives every materialization of dataset rows made by the CV driver,
// tagged with the outer fold and pipeline phase. Called from worker threads.
class AccessAuditor {
 public:
  virtual ~AccessAuditor() = default;
  virtual void record(int outer_fold, Phase phase, std::span<const std::size_t> rows) = 0;
};

// Tallies rows read per (outer fold, phase) and how many of them belong to
// that fold's test participants.
class LeakageAudit : public AccessAuditor {
 public:
  LeakageAudit(const features::Dataset& ds, const FoldPlan& plan);
  void record(int outer_fold, Phase phase, std::span<const std::size_t> rows) override;

  // Test-participant rows read in any phase other than evaluation.
  std::size_t violations() const;
  nlohmann::json to_json() const;

 private:
  struct Tally {
    std::size_t reads = 0;
    std::size_t test_reads = 0;
  };
  mutable std::mutex mutex_;
  std::vector<std::vector<bool>> is_test_;  // per fold, per row
  std::map<std::pair<int, Phase>, Tally> tallies_;
};

enum class InnerMetric { accuracy, f1 };

struct NestedCvConfig {
  int budget = 50;  // TPE trials per outer fold
  std::uint64_t seed = 0;
  int jobs = 1;
  InnerMetric metric = InnerMetric::accuracy;
  BorutaConfig boruta;  // percentile and n_trees come from each trial
  TpeConfig tpe;
  AccessAuditor* auditor = nullptr;
};

// Boruta selections keyed by (outer fold, inner part or final, percentile,
// trees). Selections do not depend on the classifier, so one cache can serve
// every algorithm evaluated on the same dataset, plan and config.
class SelectionCache {
 public:
  using Key = std::tuple<int, int, int, int>;
  std::vector<std::size_t> get(const Key& key, const std::function<std::vector<std::size_t>()>& compute);

 private:
  struct Entry {
    std::once_flag once;
    std::vector<std::size_t> value;
  };
  std::mutex mutex_;
  std::map<Key, std::shared_ptr<Entry>> entries_;
};

struct FoldResult {
  int fold = 0;
  std::vector<std::string> test_participants;
  std::vector<std::size_t> test_rows;
  std::vector<int> y_true;
  std::vector<int> y_pred;
  std::vector<double> scores;
  Confusion confusion;
  std::vector<std::string> selected_features;
  bool selection_fallback = false;  // Boruta confirmed nothing; all features used
  HyperConfig best_config;
  double best_inner_score = 0.0;
  std::vector<double> trial_losses;
};

struct AlgorithmReport {
  Algorithm algorithm = Algorithm::knn;
  std::vector<FoldResult> folds;
  Confusion pooled;
  Metrics metrics;  // from pooled counts
};

AlgorithmReport nested_cv(const features::Dataset& ds, Algorithm algorithm, const FoldPlan& plan,
                          const NestedCvConfig& config, SelectionCache* cache = nullptr);

struct OuterFit {
  TrainedModel model;
  std::vector<std::size_t> train_rows;
  bool selection_fallback = false;
};

// Final refit of one outer fold: preprocessing and Boruta on the outer
// training rows with the chosen configuration, then the classifier.
OuterFit fit_outer_model(const features::Dataset& ds, const FoldPlan& plan, int fold, Algorithm algorithm,
                         const HyperConfig& best, const NestedCvConfig& config, SelectionCache* cache = nullptr);

}  // namespace ecogvoice::learn
