#include "ecogvoice/learn/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ecogvoice/learn/gbt.hpp"

namespace ecogvoice::learn {

namespace {

double column_median(const Eigen::MatrixXd& x, Eigen::Index c) {
  std::vector<double> v;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    if (!std::isnan(x(r, c))) v.push_back(x(r, c));
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void check_two_classes(std::span<const int> y) {
  bool has0 = false, has1 = false;
  for (int v : y) (v ? has1 : has0) = true;
  if (!has0 || !has1) throw std::invalid_argument("training fold contains a single class");
}

class Knn final : public Classifier {
 public:
  explicit Knn(const HyperConfig& c)
      : k_(get_int(c, "n_neighbors")),
        distance_weights_(get_string(c, "weights") == "distance"),
        metric_(get_string(c, "metric")) {
    if (metric_ != "euclidean" && metric_ != "manhattan" && metric_ != "minkowski")
      throw std::invalid_argument("unknown knn metric " + metric_);
  }

  void fit(const Eigen::MatrixXd& x, std::span<const int> y, std::uint64_t) override {
    x_ = x;
    y_.assign(y.begin(), y.end());
  }

  Eigen::VectorXd score(const Eigen::MatrixXd& x) const override {
    const Eigen::Index n = x_.rows();
    const int k = std::min<int>(k_, static_cast<int>(n));
    Eigen::VectorXd out(x.rows());
    std::vector<std::pair<double, Eigen::Index>> d(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = {distance(x.row(r), x_.row(i)), i};
      std::partial_sort(d.begin(), d.begin() + k, d.end());
      double high = 0.0, total = 0.0;
      const bool exact = distance_weights_ && d[0].first == 0.0;
      for (int j = 0; j < k; ++j) {
        double w = 1.0;
        if (distance_weights_) w = exact ? (d[static_cast<std::size_t>(j)].first == 0.0 ? 1.0 : 0.0)
                                         : 1.0 / d[static_cast<std::size_t>(j)].first;
        total += w;
        if (y_[static_cast<std::size_t>(d[static_cast<std::size_t>(j)].second)]) high += w;
      }
      out(r) = total > 0.0 ? high / total : 0.0;
    }
    return out;
  }

  double threshold() const override { return 0.5; }

 private:
  double distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                  const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
    const auto diff = (a - b).array().abs();
    if (metric_ == "manhattan") return diff.sum();
    if (metric_ == "minkowski") return std::cbrt(diff.cube().sum());
    return std::sqrt(diff.square().sum());
  }

  int k_;
  bool distance_weights_;
  std::string metric_;
  Eigen::MatrixXd x_;
  std::vector<int> y_;
};

// Penalized logistic regression, intercept unpenalized, minimized with
// restarted FISTA on (1/n) sum loss + penalty / (C n).
class LogReg final : public Classifier {
 public:
  explicit LogReg(const HyperConfig& c) : c_(get_number(c, "C")) {
    const auto& pen = get_string(c, "penalty");
    if (pen == "l2") {
      l1_ = 0.0;
    } else if (pen == "l1") {
      l1_ = 1.0;
    } else if (pen == "elasticnet") {
      l1_ = get_number(c, "l1_ratio");
    } else if (pen == "none") {
      none_ = true;
    } else {
      throw std::invalid_argument("unknown penalty " + pen);
    }
  }

  void fit(const Eigen::MatrixXd& x, std::span<const int> y, std::uint64_t) override {
    const Eigen::Index n = x.rows(), p = x.cols();
    const double nd = static_cast<double>(n);
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];
    const double reg = none_ ? 0.0 : 1.0 / (c_ * nd);
    const double lam1 = reg * l1_;
    const double lam2 = reg * (1.0 - l1_);

    // Lipschitz bound of the smooth part: 0.25 * sigma_max([X 1])^2 / n + lam2.
    Eigen::MatrixXd xa(n, p + 1);
    xa << x, Eigen::VectorXd::Ones(n);
    const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(xa).singularValues()(0);
    const double step = 1.0 / (0.25 * sigma * sigma / nd + lam2 + 1e-12);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1), z = w, w_prev = w;
    double t = 1.0;
    for (int it = 0; it < 5000; ++it) {
      const Eigen::VectorXd pr = (xa * z).unaryExpr([](double m) { return 1.0 / (1.0 + std::exp(-m)); });
      Eigen::VectorXd grad = xa.transpose() * (pr - yv) / nd;
      grad.head(p) += lam2 * z.head(p);
      w_prev = w;
      w = z - step * grad;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double a = step * lam1;
        w(j) = w(j) > a ? w(j) - a : (w(j) < -a ? w(j) + a : 0.0);
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      // Gradient-based adaptive restart.
      if ((z - w).dot(w - w_prev) > 0.0) {
        t = 1.0;
        z = w;
      } else {
        z = w + ((t - 1.0) / t_next) * (w - w_prev);
        t = t_next;
      }
      if ((w - w_prev).lpNorm<Eigen::Infinity>() < 1e-9 * std::max(1.0, w.lpNorm<Eigen::Infinity>())) break;
    }
    coef_ = w.head(p);
    intercept_ = w(p);
  }

  Eigen::VectorXd score(const Eigen::MatrixXd& x) const override {
    return ((x * coef_).array() + intercept_).unaryExpr([](double m) { return 1.0 / (1.0 + std::exp(-m)); });
  }

  double threshold() const override { return 0.5; }

 private:
  double c_;
  double l1_ = 0.0;
  bool none_ = false;
  Eigen::VectorXd coef_;
  double intercept_ = 0.0;
};

// C-SVM dual solved by SMO with maximal-violating-pair selection.
class Svm final : public Classifier {
 public:
  explicit Svm(const HyperConfig& c)
      : rbf_(get_string(c, "kernel") == "rbf"), c_(get_number(c, "C")), gamma_(get_number(c, "gamma")) {}

  void fit(const Eigen::MatrixXd& x, std::span<const int> y, std::uint64_t) override {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) k(i, j) = k(j, i) = kernel(x.row(i), x.row(j));
    Eigen::VectorXd yy(n);
    for (Eigen::Index i = 0; i < n; ++i) yy(i) = y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = -Eigen::VectorXd::Ones(n);  // gradient of 0.5 a'Qa - 1'a
    const double eps = 1e-3;
    const int max_iter = 100000;
    for (int it = 0; it < max_iter; ++it) {
      // i: max of -y*grad over I_up, j: min over I_low.
      Eigen::Index i = -1, j = -1;
      double gmax = -std::numeric_limits<double>::infinity(), gmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index t = 0; t < n; ++t) {
        const double v = -yy(t) * grad(t);
        const bool up = (yy(t) > 0 && alpha(t) < c_) || (yy(t) < 0 && alpha(t) > 0);
        const bool low = (yy(t) > 0 && alpha(t) > 0) || (yy(t) < 0 && alpha(t) < c_);
        if (up && v > gmax) {
          gmax = v;
          i = t;
        }
        if (low && v < gmin) {
          gmin = v;
          j = t;
        }
      }
      if (i < 0 || j < 0 || gmax - gmin < eps) break;
      const double quad = std::max(k(i, i) + k(j, j) - 2.0 * k(i, j), 1e-12);
      // Step along y_i e_i - y_j e_j, clipped to the box.
      double delta = (gmax - gmin) / quad;
      const double ai = alpha(i), aj = alpha(j);
      delta = std::min(delta, yy(i) > 0 ? c_ - ai : ai);
      delta = std::min(delta, yy(j) > 0 ? aj : c_ - aj);
      alpha(i) += yy(i) * delta;
      alpha(j) -= yy(j) * delta;
      for (Eigen::Index t = 0; t < n; ++t)
        grad(t) += yy(t) * (k(t, i) * delta - k(t, j) * delta);
    }

    // rho from free vectors, else midpoint of its feasible interval; b = -rho.
    double sum = 0.0;
    int free = 0;
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double yg = yy(t) * grad(t);
      const bool at_upper = alpha(t) >= c_ - 1e-12;
      const bool at_lower = alpha(t) <= 1e-12;
      if (!at_upper && !at_lower) {
        sum += yg;
        ++free;
      } else if ((at_upper && yy(t) < 0) || (at_lower && yy(t) > 0)) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    }
    double rho = 0.0;
    if (free > 0)
      rho = sum / free;
    else if (std::isfinite(ub) && std::isfinite(lb))
      rho = 0.5 * (ub + lb);
    else
      rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
    b_ = -rho;

    sv_.resize(0, x.cols());
    coef_.resize(0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index t = 0; t < n; ++t)
      if (alpha(t) > 1e-12) keep.push_back(t);
    sv_.resize(static_cast<Eigen::Index>(keep.size()), x.cols());
    coef_.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t q = 0; q < keep.size(); ++q) {
      sv_.row(static_cast<Eigen::Index>(q)) = x.row(keep[q]);
      coef_(static_cast<Eigen::Index>(q)) = alpha(keep[q]) * yy(keep[q]);
    }
  }

  Eigen::VectorXd score(const Eigen::MatrixXd& x) const override {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), b_);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index s = 0; s < sv_.rows(); ++s) out(r) += coef_(s) * kernel(x.row(r), sv_.row(s));
    return out;
  }

  double threshold() const override { return 0.0; }

 private:
  double kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
    if (!rbf_) return a.dot(b);
    return std::exp(-gamma_ * (a - b).squaredNorm());
  }

  bool rbf_;
  double c_, gamma_;
  double b_ = 0.0;
  Eigen::MatrixXd sv_;
  Eigen::VectorXd coef_;
};

class Gbt final : public Classifier {
 public:
  explicit Gbt(GbtParams params) : params_(params) {}
  void fit(const Eigen::MatrixXd& x, std::span<const int> y, std::uint64_t seed) override {
    model_.fit(x, y, params_, seed);
  }
  Eigen::VectorXd score(const Eigen::MatrixXd& x) const override { return model_.predict_proba(x); }
  double threshold() const override { return 0.5; }

 private:
  GbtParams params_;
  GbtModel model_;
};

}  // namespace

Preprocessor Preprocessor::fit(const Eigen::MatrixXd& train) {
  Preprocessor p;
  p.fit_medians(train);
  p.fit_scaling(train);
  return p;
}

void Preprocessor::fit_medians(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) throw std::invalid_argument("cannot fit preprocessing on zero rows");
  median.resize(train.cols());
  for (Eigen::Index j = 0; j < train.cols(); ++j) median(j) = column_median(train, j);
}

void Preprocessor::fit_scaling(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) throw std::invalid_argument("cannot fit preprocessing on zero rows");
  const Eigen::MatrixXd imputed = impute(train);
  mean = imputed.colwise().mean().transpose();
  scale.resize(train.cols());
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    const double var = (imputed.col(j).array() - mean(j)).square().mean();
    scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
}

Eigen::MatrixXd Preprocessor::impute(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = x;
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      if (std::isnan(out(r, j))) out(r, j) = median(j);
  return out;
}

Eigen::MatrixXd Preprocessor::transform(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = impute(x);
  for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) = (out.col(j).array() - mean(j)) / scale(j);
  return out;
}

std::unique_ptr<Classifier> make_classifier(Algorithm a, const HyperConfig& config) {
  switch (a) {
    case Algorithm::knn: return std::make_unique<Knn>(config);
    case Algorithm::logreg: return std::make_unique<LogReg>(config);
    case Algorithm::svm: return std::make_unique<Svm>(config);
    case Algorithm::gbt_a: return std::make_unique<Gbt>(gbt_a_params(config));
    case Algorithm::gbt_b: return std::make_unique<Gbt>(gbt_b_params(config));
  }
  throw std::invalid_argument("unknown algorithm");
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& x, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

Eigen::VectorXd TrainedModel::score(const Eigen::MatrixXd& raw) const {
  Eigen::MatrixXd sub = take_columns(raw, selected);
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(selected[k]);
    auto col = sub.col(static_cast<Eigen::Index>(k));
    for (Eigen::Index r = 0; r < col.size(); ++r)
      if (std::isnan(col(r))) col(r) = prep.median(c);
    col = (col.array() - prep.mean(c)) / prep.scale(c);
  }
  return classifier->score(sub);
}

std::vector<int> TrainedModel::predict(const Eigen::MatrixXd& raw) const {
  const Eigen::VectorXd s = score(raw);
  const double t = threshold();
  std::vector<int> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i) > t ? 1 : 0;
  return out;
}

TrainedModel fit_model(Algorithm a, const Preprocessor& prep, const Eigen::MatrixXd& prepared,
                       std::span<const int> y, const HyperConfig& config, std::vector<std::size_t> selected,
                       std::uint64_t seed) {
  check_two_classes(y);
  if (selected.empty()) throw std::invalid_argument("empty feature subset");
  TrainedModel m;
  m.algorithm = a;
  m.config = config;
  m.prep = prep;
  m.selected = std::move(selected);
  auto clf = make_classifier(a, config);
  clf->fit(take_columns(prepared, m.selected), y, seed);
  m.classifier = std::move(clf);
  return m;
}

TrainedModel fit_model(Algorithm a, const Eigen::MatrixXd& raw, std::span<const int> y,
                       const HyperConfig& config, std::vector<std::size_t> selected, std::uint64_t seed) {
  const Preprocessor prep = Preprocessor::fit(raw);
  return fit_model(a, prep, prep.transform(raw), y, config, std::move(selected), seed);
}

}  // namespace ecogvoice::learn
