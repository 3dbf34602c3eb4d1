#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ecogvoice/learn/hyperspace.hpp"

namespace ecogvoice::learn {

// Training-fold medians for missing cells (NaN), then z-scoring with the
// training mean and population SD (SD 0 -> 1).
struct Preprocessor {
  Eigen::VectorXd median;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Preprocessor fit(const Eigen::MatrixXd& train);
  // The two halves of fit(): medians from raw rows, then mean/SD of the
  // same rows after imputation.
  void fit_medians(const Eigen::MatrixXd& train);
  void fit_scaling(const Eigen::MatrixXd& train);
  Eigen::MatrixXd impute(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  // y in {0, 1}, 1 = high.
  virtual void fit(const Eigen::MatrixXd& x, std::span<const int> y, std::uint64_t seed) = 0;
  // Continuous output; a row is predicted high iff score > threshold().
  virtual Eigen::VectorXd score(const Eigen::MatrixXd& x) const = 0;
  virtual double threshold() const = 0;
};

std::unique_ptr<Classifier> make_classifier(Algorithm a, const HyperConfig& config);

struct TrainedModel {
  Algorithm algorithm = Algorithm::knn;
  HyperConfig config;
  Preprocessor prep;
  std::vector<std::size_t> selected;  // columns of the full feature matrix
  std::shared_ptr<const Classifier> classifier;

  // Rows are raw (unimputed, unscaled) full-width feature rows. Columns
  // outside `selected` are never read.
  Eigen::VectorXd score(const Eigen::MatrixXd& raw) const;
  std::vector<int> predict(const Eigen::MatrixXd& raw) const;
  double threshold() const { return classifier->threshold(); }
};

// prep must have been fitted on the rows of `prepared`, which holds their
// imputed and standardized values. Throws std::invalid_argument when y has a
// single class.
TrainedModel fit_model(Algorithm a, const Preprocessor& prep, const Eigen::MatrixXd& prepared,
                       std::span<const int> y, const HyperConfig& config, std::vector<std::size_t> selected,
                       std::uint64_t seed);

// Convenience: fits the preprocessor on raw training rows first.
TrainedModel fit_model(Algorithm a, const Eigen::MatrixXd& raw, std::span<const int> y,
                       const HyperConfig& config, std::vector<std::size_t> selected, std::uint64_t seed);

// Columns `cols` of x, in that order.
Eigen::MatrixXd take_columns(const Eigen::MatrixXd& x, std::span<const std::size_t> cols);

}  // namespace ecogvoice::learn
