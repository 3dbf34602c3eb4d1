#include "ecogvoice/learn/boruta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>

#include "ecogvoice/learn/binning.hpp"
#include "ecogvoice/learn/forest.hpp"
#include "ecogvoice/rng.hpp"

namespace ecogvoice::learn {

namespace {

// Linear-interpolation percentile (q in [0, 100]).
double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

double median(std::vector<double> v) { return percentile(std::move(v), 50.0); }

// Benjamini-Hochberg rejections at level alpha.
std::vector<bool> bh_reject(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (p[order[i]] <= alpha * static_cast<double>(i + 1) / static_cast<double>(m)) k = i + 1;
  std::vector<bool> out(m, false);
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = true;
  return out;
}

}  // namespace

BorutaResult boruta_select(const Eigen::MatrixXd& x, std::span<const int> y, const BorutaConfig& config,
                           std::uint64_t seed) {
  if (config.max_iter < 20) throw std::invalid_argument("boruta max_iter must be at least 20");
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("boruta needs a non-empty matrix");
  if (static_cast<Eigen::Index>(y.size()) != x.rows()) throw std::invalid_argument("label count mismatch");

  const int p = static_cast<int>(x.cols());
  const BinnedMatrix base = bin_matrix(x, config.max_bins);
  BorutaResult res;
  res.decisions.assign(static_cast<std::size_t>(p), BorutaDecision::tentative);
  res.hits.assign(static_cast<std::size_t>(p), 0);
  std::vector<std::vector<double>> imp_history(static_cast<std::size_t>(p));
  std::vector<double> shadow_history;

  ForestConfig fc;
  fc.n_trees = config.n_trees;
  fc.max_depth = config.max_depth;
  Rng rng(seed);

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    std::vector<int> active;
    for (int c = 0; c < p; ++c)
      if (res.decisions[static_cast<std::size_t>(c)] != BorutaDecision::rejected) active.push_back(c);
    bool any_tentative = false;
    for (auto d : res.decisions) any_tentative |= d == BorutaDecision::tentative;
    if (!any_tentative) break;

    // Active real columns followed by a shadow of every column. A shadow keeps
    // its source's bin edges, so permuting codes equals binning permuted values.
    const int a = static_cast<int>(active.size());
    BinnedMatrix m;
    m.rows = base.rows;
    m.cols = a + p;
    m.codes.resize(static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols));
    m.thresholds.resize(static_cast<std::size_t>(m.cols));
    for (int k = 0; k < a; ++k) {
      const std::uint8_t* src = base.column(active[k]);
      std::copy(src, src + m.rows, m.codes.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(m.rows));
      m.thresholds[static_cast<std::size_t>(k)] = base.thresholds[static_cast<std::size_t>(active[k])];
    }
    std::vector<int> perm(static_cast<std::size_t>(m.rows));
    for (int c = 0; c < p; ++c) {
      const std::uint8_t* src = base.column(c);
      std::uint8_t* shadow = m.codes.data() + static_cast<std::size_t>(a + c) * static_cast<std::size_t>(m.rows);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int r = 0; r < m.rows; ++r) shadow[r] = src[perm[static_cast<std::size_t>(r)]];
      m.thresholds[static_cast<std::size_t>(a + c)] = base.thresholds[static_cast<std::size_t>(c)];
    }
    const Eigen::VectorXd imp = forest_importance(m, y, fc, derive_seed(seed, {static_cast<std::uint64_t>(iter)}));
    std::vector<double> shadows(imp.data() + a, imp.data() + a + p);
    const double threshold = percentile(shadows, config.percentile);
    shadow_history.push_back(threshold);
    for (int k = 0; k < a; ++k) {
      imp_history[static_cast<std::size_t>(active[k])].push_back(imp(k));
      if (imp(k) > threshold) ++res.hits[static_cast<std::size_t>(active[k])];
    }

    std::vector<int> undecided;
    std::vector<double> p_accept, p_reject;
    const boost::math::binomial_distribution<double> binom(iter, 0.5);
    for (int c = 0; c < p; ++c) {
      if (res.decisions[static_cast<std::size_t>(c)] != BorutaDecision::tentative) continue;
      const int h = res.hits[static_cast<std::size_t>(c)];
      undecided.push_back(c);
      p_accept.push_back(h > 0 ? boost::math::cdf(boost::math::complement(binom, h - 1)) : 1.0);
      p_reject.push_back(boost::math::cdf(binom, h));
    }
    const auto acc = bh_reject(p_accept, config.alpha);
    const auto rej = bh_reject(p_reject, config.alpha);
    const double bonf = config.alpha / iter;
    for (std::size_t i = 0; i < undecided.size(); ++i) {
      auto& d = res.decisions[static_cast<std::size_t>(undecided[i])];
      if (acc[i] && p_accept[i] <= bonf)
        d = BorutaDecision::confirmed;
      else if (rej[i] && p_reject[i] <= bonf)
        d = BorutaDecision::rejected;
    }
    res.iterations = iter;
  }

  const double shadow_median = shadow_history.empty() ? 0.0 : median(shadow_history);
  for (int c = 0; c < p; ++c) {
    auto& d = res.decisions[static_cast<std::size_t>(c)];
    if (d == BorutaDecision::tentative) {
      const auto& h = imp_history[static_cast<std::size_t>(c)];
      d = !h.empty() && median(h) > shadow_median ? BorutaDecision::confirmed : BorutaDecision::rejected;
    }
    if (d == BorutaDecision::confirmed) res.confirmed.push_back(static_cast<std::size_t>(c));
  }
  return res;
}

}  // namespace ecogvoice::learn
