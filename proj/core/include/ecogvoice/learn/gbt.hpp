#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ecogvoice/learn/hyperspace.hpp"

namespace ecogvoice::learn {

enum class Booster { gbtree, gblinear, dart };
enum class GrowPolicy { depthwise, lossguide };
enum class DartSample { uniform, weighted };
enum class DartNormalize { tree, forest };

// Second-order boosting of logistic loss with histogram split search.
struct GbtParams {
  Booster booster = Booster::gbtree;
  int n_rounds = 100;
  double eta = 0.3;
  double lambda = 1.0;            // L2 on leaf weights
  double alpha = 0.0;             // L1 on leaf weights
  double gamma = 0.0;             // minimum split gain
  double min_child_weight = 1.0;  // minimum hessian sum per child
  int min_child_samples = 0;      // minimum rows per child
  int max_depth = 6;              // 0 = unlimited
  int max_leaves = 0;             // 0 = unlimited
  GrowPolicy grow_policy = GrowPolicy::depthwise;
  double subsample = 1.0;         // row fraction per draw
  int bagging_freq = 1;           // rounds between row redraws
  double colsample_bytree = 1.0;  // column fraction per tree
  DartSample sample_type = DartSample::uniform;
  DartNormalize normalize_type = DartNormalize::tree;
  double rate_drop = 0.0;
  double skip_drop = 0.0;
  int max_bins = 64;
};

// Depth-wise xgboost-like preset driven by the gbt-a hyperparameters.
GbtParams gbt_a_params(const HyperConfig& c);
// Leaf-wise lightgbm-like preset driven by the gbt-b hyperparameters:
// learning rate 0.1, 100 rounds, min_child_samples 20, unlimited depth.
GbtParams gbt_b_params(const HyperConfig& c);

class GbtModel {
 public:
  // y in {0, 1}. The initial margin is the log-odds of the training mean.
  void fit(const Eigen::MatrixXd& x, std::span<const int> y, const GbtParams& params, std::uint64_t seed);

  Eigen::VectorXd margin(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;

  // Mean logistic loss on the full training set after each round.
  const std::vector<double>& training_loss() const { return loss_; }
  std::size_t tree_count() const { return trees_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;
  };
  struct Tree {
    std::vector<Node> nodes;
    double weight = 1.0;
    double eval(const double* row, Eigen::Index stride) const;
  };

  double base_margin_ = 0.0;
  bool linear_ = false;
  Eigen::VectorXd linear_w_;
  double linear_b_ = 0.0;
  std::vector<Tree> trees_;
  std::vector<double> loss_;
};

}  // namespace ecogvoice::learn
