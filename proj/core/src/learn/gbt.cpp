#include "ecogvoice/learn/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "ecogvoice/learn/binning.hpp"
#include "ecogvoice/rng.hpp"

namespace ecogvoice::learn {

namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

double soft_threshold(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

double mean_logloss(const std::vector<double>& margin, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    const double m = margin[i];
    // log(1 + exp(-m)) for y = 1, log(1 + exp(m)) for y = 0, overflow-safe
    const double z = y[i] ? -m : m;
    s += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return s / static_cast<double>(margin.size());
}

struct Split {
  double gain = 0.0;
  int feature = -1;
  int bin = -1;
};

// Grows one regression tree on gradient statistics.
class Grower {
 public:
  Grower(const BinnedMatrix& x, const std::vector<double>& g, const std::vector<double>& h,
         const GbtParams& p, const std::vector<int>& features)
      : x_(x), g_(g), h_(h), p_(p), features_(features) {}

  struct Built {
    std::vector<int> feature, bin, left, right;
    std::vector<double> value;
  };

  Built grow(std::vector<int> rows) {
    Built t;
    struct Pending {
      int node;
      int depth;
      std::vector<int> rows;
      Split split;
    };
    auto new_leaf = [&](const std::vector<int>& rows_in) {
      double G = 0.0, H = 0.0;
      for (int r : rows_in) {
        G += g_[r];
        H += h_[r];
      }
      t.feature.push_back(-1);
      t.bin.push_back(-1);
      t.left.push_back(-1);
      t.right.push_back(-1);
      t.value.push_back(-soft_threshold(G, p_.alpha) / (H + p_.lambda) * p_.eta);
      return static_cast<int>(t.value.size()) - 1;
    };

    const bool leafwise = p_.grow_policy == GrowPolicy::lossguide;
    auto cmp = [](const Pending& a, const Pending& b) {
      if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
      return a.node > b.node;
    };
    std::priority_queue<Pending, std::vector<Pending>, decltype(cmp)> best_first(cmp);
    std::vector<Pending> level;

    Pending root{new_leaf(rows), 0, std::move(rows), {}};
    root.split = find_split(root.rows, root.depth);
    int leaves = 1;
    if (leafwise)
      best_first.push(std::move(root));
    else
      level.push_back(std::move(root));

    auto expand = [&](Pending& n, auto&& emit) {
      std::vector<int> lr, rr;
      const std::uint8_t* col = x_.column(n.split.feature);
      for (int r : n.rows) (col[r] <= n.split.bin ? lr : rr).push_back(r);
      t.feature[n.node] = n.split.feature;
      t.bin[n.node] = n.split.bin;
      const int l = new_leaf(lr);
      const int r = new_leaf(rr);
      t.left[n.node] = l;
      t.right[n.node] = r;
      ++leaves;
      Pending pl{l, n.depth + 1, std::move(lr), {}};
      Pending pr{r, n.depth + 1, std::move(rr), {}};
      pl.split = find_split(pl.rows, pl.depth);
      pr.split = find_split(pr.rows, pr.depth);
      emit(std::move(pl));
      emit(std::move(pr));
    };

    if (leafwise) {
      while (!best_first.empty()) {
        if (p_.max_leaves > 0 && leaves >= p_.max_leaves) break;
        Pending n = best_first.top();
        best_first.pop();
        if (n.split.feature < 0) continue;
        expand(n, [&](Pending&& c) { best_first.push(std::move(c)); });
      }
    } else {
      while (!level.empty()) {
        std::vector<Pending> next;
        for (auto& n : level) {
          if (n.split.feature < 0) continue;
          if (p_.max_leaves > 0 && leaves >= p_.max_leaves) break;
          expand(n, [&](Pending&& c) { next.push_back(std::move(c)); });
        }
        level = std::move(next);
      }
    }
    return t;
  }

 private:
  double score(double G, double H) const {
    const double t = soft_threshold(G, p_.alpha);
    return t * t / (H + p_.lambda);
  }

  Split find_split(const std::vector<int>& rows, int depth) {
    Split best;
    if (p_.max_depth > 0 && depth >= p_.max_depth) return best;
    const int n = static_cast<int>(rows.size());
    if (n < 2 * std::max(1, p_.min_child_samples)) return best;
    double G = 0.0, H = 0.0;
    for (int r : rows) {
      G += g_[r];
      H += h_[r];
    }
    const double parent = score(G, H);
    best.gain = p_.gamma > 0.0 ? p_.gamma : 1e-12;
    hg_.resize(256);
    hh_.resize(256);
    hn_.resize(256);
    for (int f : features_) {
      const int nb = x_.bins(f);
      if (nb < 2) continue;
      std::fill_n(hg_.begin(), nb, 0.0);
      std::fill_n(hh_.begin(), nb, 0.0);
      std::fill_n(hn_.begin(), nb, 0);
      const std::uint8_t* col = x_.column(f);
      for (int r : rows) {
        const int b = col[r];
        hg_[b] += g_[r];
        hh_[b] += h_[r];
        ++hn_[b];
      }
      double gl = 0.0, hl = 0.0;
      int nl = 0;
      for (int b = 0; b + 1 < nb; ++b) {
        gl += hg_[b];
        hl += hh_[b];
        nl += hn_[b];
        if (hn_[b] == 0) continue;
        const int nr = n - nl;
        if (nl < p_.min_child_samples || nr < p_.min_child_samples || nl == 0 || nr == 0) continue;
        const double hr = H - hl;
        if (hl < p_.min_child_weight || hr < p_.min_child_weight) continue;
        const double gain = 0.5 * (score(gl, hl) + score(G - gl, hr) - parent);
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = f;
          best.bin = b;
        }
      }
    }
    if (best.feature < 0) best.gain = 0.0;
    return best;
  }

  const BinnedMatrix& x_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const GbtParams& p_;
  const std::vector<int>& features_;
  std::vector<double> hg_, hh_;
  std::vector<int> hn_;
};

}  // namespace

GbtParams gbt_a_params(const HyperConfig& c) {
  GbtParams p;
  const auto& booster = get_string(c, "booster");
  p.booster = booster == "gblinear" ? Booster::gblinear
              : booster == "dart"   ? Booster::dart
                                    : Booster::gbtree;
  p.lambda = get_number(c, "lambda");
  p.alpha = get_number(c, "alpha");
  p.subsample = get_number(c, "subsample");
  p.colsample_bytree = get_number(c, "colsample_bytree");
  p.max_depth = get_int(c, "max_depth");
  p.min_child_weight = get_number(c, "min_child_weight");
  p.eta = get_number(c, "eta");
  p.gamma = get_number(c, "gamma");
  p.grow_policy = get_string(c, "grow_policy") == "lossguide" ? GrowPolicy::lossguide : GrowPolicy::depthwise;
  p.sample_type = get_string(c, "sample_type") == "weighted" ? DartSample::weighted : DartSample::uniform;
  p.normalize_type = get_string(c, "normalize_type") == "forest" ? DartNormalize::forest : DartNormalize::tree;
  p.rate_drop = get_number(c, "rate_drop");
  p.skip_drop = get_number(c, "skip_drop");
  return p;
}

GbtParams gbt_b_params(const HyperConfig& c) {
  GbtParams p;
  p.booster = Booster::gbtree;
  p.eta = 0.1;
  p.alpha = get_number(c, "lambda_l1");
  p.lambda = get_number(c, "lambda_l2");
  p.max_leaves = get_int(c, "num_leaves");
  p.max_depth = 0;
  p.grow_policy = GrowPolicy::lossguide;
  p.colsample_bytree = get_number(c, "feature_fraction");
  p.subsample = get_number(c, "bagging_fraction");
  p.bagging_freq = get_int(c, "bagging_freq");
  p.min_child_samples = 20;
  p.min_child_weight = 1e-3;
  p.gamma = 0.0;
  return p;
}

double GbtModel::Tree::eval(const double* row, Eigen::Index stride) const {
  int i = 0;
  while (nodes[i].feature >= 0)
    i = row[nodes[i].feature * stride] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

void GbtModel::fit(const Eigen::MatrixXd& x, std::span<const int> y, const GbtParams& params,
                   std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0 || static_cast<std::size_t>(y.size()) != n) throw std::invalid_argument("gbt: bad training data");
  const int p = static_cast<int>(x.cols());
  trees_.clear();
  loss_.clear();
  linear_ = params.booster == Booster::gblinear;

  double ybar = 0.0;
  for (int v : y) ybar += v;
  ybar /= static_cast<double>(n);
  if (ybar <= 0.0 || ybar >= 1.0) throw std::invalid_argument("gbt: training labels contain a single class");
  base_margin_ = std::log(ybar / (1.0 - ybar));

  std::vector<double> margin(n, base_margin_), g(n), h(n);
  auto gradients = [&](const std::vector<double>& m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pr = sigmoid(m[i]);
      g[i] = pr - y[i];
      h[i] = std::max(pr * (1.0 - pr), 1e-16);
    }
  };
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  if (linear_) {
    // Coordinate descent, one Newton step per weight per round; penalties
    // scale with the number of rows.
    linear_w_ = Eigen::VectorXd::Zero(p);
    linear_b_ = 0.0;
    const double lam = params.lambda * static_cast<double>(n);
    const double alp = params.alpha * static_cast<double>(n);
    for (int round = 0; round < params.n_rounds; ++round) {
      gradients(margin);
      double G = 0.0, H = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        G += g[i];
        H += h[i];
      }
      const double db = params.eta * (-G / H);
      linear_b_ += db;
      for (std::size_t i = 0; i < n; ++i) {
        margin[i] += db;
        g[i] += h[i] * db;
      }
      for (int j = 0; j < p; ++j) {
        double sg = 0.0, sh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = x(static_cast<Eigen::Index>(i), j);
          sg += g[i] * v;
          sh += h[i] * v * v;
        }
        if (sh < 1e-5) continue;
        const double w = linear_w_(j);
        const double sg2 = sg + lam * w, sh2 = sh + lam;
        const double tmp = w - sg2 / sh2;
        const double step = tmp >= 0.0 ? std::max(-(sg2 + alp) / sh2, -w) : std::min(-(sg2 - alp) / sh2, -w);
        const double dw = params.eta * step;
        if (dw == 0.0) continue;
        linear_w_(j) += dw;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = dw * x(static_cast<Eigen::Index>(i), j);
          margin[i] += d;
          g[i] += h[i] * d;
        }
      }
      loss_.push_back(mean_logloss(margin, y));
    }
    return;
  }

  const BinnedMatrix bins = bin_matrix(x, params.max_bins);
  const int n_cols = std::clamp(static_cast<int>(std::lround(params.colsample_bytree * p)), 1, p);
  const int n_rows = std::clamp(static_cast<int>(std::lround(params.subsample * static_cast<double>(n))), 1,
                                static_cast<int>(n));
  std::vector<int> all_rows(n), sample_rows, all_cols(static_cast<std::size_t>(p));
  std::iota(all_rows.begin(), all_rows.end(), 0);
  std::iota(all_cols.begin(), all_cols.end(), 0);
  std::vector<std::vector<double>> tree_out;  // per-tree training outputs (dart)

  for (int round = 0; round < params.n_rounds; ++round) {
    if (round % std::max(1, params.bagging_freq) == 0 || sample_rows.empty()) {
      sample_rows = all_rows;
      if (n_rows < static_cast<int>(n)) {
        std::shuffle(sample_rows.begin(), sample_rows.end(), rng);
        sample_rows.resize(static_cast<std::size_t>(n_rows));
        std::sort(sample_rows.begin(), sample_rows.end());
      }
    }
    std::vector<int> cols = all_cols;
    if (n_cols < p) {
      std::shuffle(cols.begin(), cols.end(), rng);
      cols.resize(static_cast<std::size_t>(n_cols));
      std::sort(cols.begin(), cols.end());
    }

    std::vector<std::size_t> dropped;
    std::vector<double> fit_margin = margin;
    if (params.booster == Booster::dart && !trees_.empty() && u(rng) >= params.skip_drop) {
      double wsum = 0.0;
      for (const auto& t : trees_) wsum += t.weight;
      for (std::size_t k = 0; k < trees_.size(); ++k) {
        const double prob = params.sample_type == DartSample::weighted
                                ? std::min(1.0, params.rate_drop * static_cast<double>(trees_.size()) *
                                                    trees_[k].weight / wsum)
                                : params.rate_drop;
        if (u(rng) < prob) dropped.push_back(k);
      }
      for (auto k : dropped)
        for (std::size_t i = 0; i < n; ++i) fit_margin[i] -= trees_[k].weight * tree_out[k][i];
    }
    gradients(fit_margin);

    Grower grower(bins, g, h, params, cols);
    const auto built = grower.grow(sample_rows);
    Tree tree;
    tree.nodes.resize(built.value.size());
    for (std::size_t k = 0; k < built.value.size(); ++k) {
      auto& nd = tree.nodes[k];
      nd.feature = built.feature[k];
      nd.left = built.left[k];
      nd.right = built.right[k];
      nd.value = built.value[k];
      if (nd.feature >= 0) nd.threshold = bins.thresholds[static_cast<std::size_t>(nd.feature)][static_cast<std::size_t>(built.bin[k])];
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      int k = 0;
      while (built.feature[k] >= 0)
        k = bins.code(static_cast<int>(i), built.feature[k]) <= built.bin[k] ? built.left[k] : built.right[k];
      out[i] = built.value[k];
    }

    if (!dropped.empty()) {
      const double kd = static_cast<double>(dropped.size());
      const double lr = params.eta;
      const double old_factor = params.normalize_type == DartNormalize::forest ? 1.0 / (1.0 + lr) : kd / (kd + lr);
      tree.weight = params.normalize_type == DartNormalize::forest ? 1.0 / (1.0 + lr) : 1.0 / (kd + lr);
      for (auto k : dropped) {
        const double before = trees_[k].weight;
        trees_[k].weight *= old_factor;
        for (std::size_t i = 0; i < n; ++i) margin[i] += (trees_[k].weight - before) * tree_out[k][i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) margin[i] += tree.weight * out[i];
    trees_.push_back(std::move(tree));
    if (params.booster == Booster::dart) tree_out.push_back(std::move(out));
    loss_.push_back(mean_logloss(margin, y));
  }
}

Eigen::VectorXd GbtModel::margin(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd m = Eigen::VectorXd::Constant(x.rows(), base_margin_);
  if (linear_) {
    m.array() += linear_b_;
    m += x * linear_w_;
    return m;
  }
  const Eigen::Index stride = x.rows();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double* row = x.data() + r;
    double s = 0.0;
    for (const auto& t : trees_) s += t.weight * t.eval(row, stride);
    m(r) += s;
  }
  return m;
}

Eigen::VectorXd GbtModel::predict_proba(const Eigen::MatrixXd& x) const {
  return margin(x).unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace ecogvoice::learn
