#include "ecogvoice/learn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ecogvoice/rng.hpp"

namespace ecogvoice::learn {

namespace {

double gini(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0.0) return 0.0;
  const double p = w1 / w;
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const BinnedMatrix& x, std::span<const int> y, const std::vector<double>& weight,
              const ForestConfig& config, Rng& rng, Eigen::VectorXd& importance)
      : x_(x), y_(y), w_(weight), cfg_(config), rng_(rng), imp_(importance) {
    mtry_ = cfg_.mtry > 0 ? cfg_.mtry : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(x_.cols))));
    mtry_ = std::min(mtry_, x_.cols);
    features_.resize(static_cast<std::size_t>(x_.cols));
    std::iota(features_.begin(), features_.end(), 0);
    h0_.resize(256);
    h1_.resize(256);
    hn_.resize(256);
  }

  void grow(std::vector<int>& rows, int depth, double total_weight) {
    double w0 = 0.0, w1 = 0.0;
    for (int r : rows) (y_[r] ? w1 : w0) += w_[r];
    const double impurity = gini(w0, w1);
    if (depth >= cfg_.max_depth || impurity <= 0.0 ||
        static_cast<int>(rows.size()) < 2 * cfg_.min_samples_leaf)
      return;

    int best_f = -1, best_bin = -1;
    double best_gain = 1e-12;
    // Partial Fisher-Yates: the first mtry entries are this node's candidates.
    for (int k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<int> pick(k, x_.cols - 1);
      std::swap(features_[k], features_[pick(rng_)]);
    }
    for (int k = 0; k < mtry_; ++k) {
      const int f = features_[k];
      const int nb = x_.bins(f);
      if (nb < 2) continue;
      std::fill_n(h0_.begin(), nb, 0.0);
      std::fill_n(h1_.begin(), nb, 0.0);
      std::fill_n(hn_.begin(), nb, 0);
      const std::uint8_t* col = x_.column(f);
      for (int r : rows) {
        const int b = col[r];
        (y_[r] ? h1_[b] : h0_[b]) += w_[r];
        ++hn_[b];
      }
      double l0 = 0.0, l1 = 0.0;
      int ln = 0;
      for (int b = 0; b + 1 < nb; ++b) {
        l0 += h0_[b];
        l1 += h1_[b];
        ln += hn_[b];
        if (hn_[b] == 0) continue;
        const int rn = static_cast<int>(rows.size()) - ln;
        if (ln < cfg_.min_samples_leaf || rn < cfg_.min_samples_leaf) continue;
        const double lw = l0 + l1, rw = (w0 - l0) + (w1 - l1);
        if (lw <= 0.0 || rw <= 0.0) continue;
        const double gain =
            impurity - (lw * gini(l0, l1) + rw * gini(w0 - l0, w1 - l1)) / (w0 + w1);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
          best_bin = b;
        }
      }
    }
    if (best_f < 0) return;
    imp_(best_f) += (w0 + w1) / total_weight * best_gain;

    std::vector<int> left, right;
    const std::uint8_t* col = x_.column(best_f);
    for (int r : rows) (col[r] <= best_bin ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    grow(left, depth + 1, total_weight);
    grow(right, depth + 1, total_weight);
  }

 private:
  const BinnedMatrix& x_;
  std::span<const int> y_;
  const std::vector<double>& w_;
  const ForestConfig& cfg_;
  Rng& rng_;
  Eigen::VectorXd& imp_;
  int mtry_ = 1;
  std::vector<int> features_;
  std::vector<double> h0_, h1_;
  std::vector<int> hn_;
};

}  // namespace

Eigen::VectorXd forest_importance(const BinnedMatrix& x, std::span<const int> y,
                                  const ForestConfig& config, std::uint64_t seed) {
  if (static_cast<int>(y.size()) != x.rows) throw std::invalid_argument("label count mismatch");
  if (x.rows == 0 || x.cols == 0) throw std::invalid_argument("empty training matrix");
  const auto n = static_cast<std::size_t>(x.rows);
  double n1 = 0.0;
  for (int v : y) n1 += v ? 1.0 : 0.0;
  const double n0 = static_cast<double>(n) - n1;
  const double cw0 = config.balanced && n0 > 0 ? static_cast<double>(n) / (2.0 * n0) : 1.0;
  const double cw1 = config.balanced && n1 > 0 ? static_cast<double>(n) / (2.0 * n1) : 1.0;

  Rng rng(seed);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(x.cols);
  Eigen::VectorXd tree_imp(x.cols);
  std::vector<double> weight(n);
  std::vector<int> rows;
  std::uniform_int_distribution<std::size_t> draw(0, n - 1);
  for (int t = 0; t < config.n_trees; ++t) {
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) weight[draw(rng)] += 1.0;
    rows.clear();
    double tw = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (weight[i] > 0.0) {
        weight[i] *= y[i] ? cw1 : cw0;
        tw += weight[i];
        rows.push_back(static_cast<int>(i));
      }
    tree_imp.setZero();
    TreeBuilder builder(x, y, weight, config, rng, tree_imp);
    builder.grow(rows, 0, tw);
    const double s = tree_imp.sum();
    if (s > 0.0) total += tree_imp / s;
  }
  const double s = total.sum();
  if (s > 0.0) total /= s;
  return total;
}

}  // namespace ecogvoice::learn
