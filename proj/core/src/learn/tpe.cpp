#include "ecogvoice/learn/tpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace ecogvoice::learn {

namespace {

constexpr std::uint64_t kShiftTag = 0x48414c54;  // startup shift stream
constexpr double kLogFloor = -700.0;

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Sampling range of a numeric domain in the space where its Parzen
// estimator lives (log space for log-scaled parameters).
struct Range {
  double lo, hi;
};

Range transformed_range(const ParamDomain& d) {
  switch (d.kind) {
    case ParamKind::uniform: return {d.lo, d.hi};
    case ParamKind::log_uniform: return {std::log(d.lo), std::log(d.hi)};
    case ParamKind::int_uniform: return {d.lo - 0.5, d.hi + 0.5};
    case ParamKind::log_int: return {std::log(std::max(d.lo - 0.5, 1e-12)), std::log(d.hi + 0.5)};
    case ParamKind::categorical: break;
  }
  return {0.0, 1.0};
}

double to_transformed(const ParamDomain& d, double v) { return d.is_log() ? std::log(v) : v; }

double from_transformed(const ParamDomain& d, double t) {
  double v = d.is_log() ? std::exp(t) : t;
  if (d.is_int()) v = std::round(v);
  return std::clamp(v, d.lo, d.hi);
}

ParamValue from_unit(const ParamDomain& d, double u) {
  if (d.kind == ParamKind::categorical) {
    const auto k = std::min(d.choices.size() - 1, static_cast<std::size_t>(u * d.choices.size()));
    return d.choices[k];
  }
  const Range r = transformed_range(d);
  return from_transformed(d, r.lo + u * (r.hi - r.lo));
}

double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, x = 0.0;
  while (i > 0) {
    x += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return x;
}

unsigned nth_prime(std::size_t n) {
  unsigned p = 1;
  for (std::size_t found = 0; found <= n;) {
    ++p;
    bool prime = true;
    for (unsigned q = 2; q * q <= p; ++q)
      if (p % q == 0) {
        prime = false;
        break;
      }
    if (prime) ++found;
  }
  return p;
}

// Truncated Gaussian mixture over a bounded interval: adaptive Parzen
// estimator with a broad prior component at the interval centre.
class Parzen {
 public:
  Parzen(std::vector<double> obs, Range r, double prior_weight) : lo_(r.lo), hi_(r.hi) {
    const double prior_mu = 0.5 * (lo_ + hi_);
    const double prior_sigma = hi_ - lo_;
    std::sort(obs.begin(), obs.end());
    mu_ = obs;
    const auto prior_pos = static_cast<std::size_t>(
        std::lower_bound(mu_.begin(), mu_.end(), prior_mu) - mu_.begin());
    mu_.insert(mu_.begin() + static_cast<std::ptrdiff_t>(prior_pos), prior_mu);
    const std::size_t n = mu_.size();
    sigma_.assign(n, prior_sigma);
    weight_.assign(n, 1.0);
    weight_[prior_pos] = prior_weight;
    if (n > 1) {
      const double min_sigma = prior_sigma / std::min(100.0, 1.0 + static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? mu_[i] - mu_[i - 1] : mu_[i] - lo_;
        const double right = i + 1 < n ? mu_[i + 1] - mu_[i] : hi_ - mu_[i];
        sigma_[i] = std::clamp(std::max(left, right), min_sigma, prior_sigma);
      }
      sigma_[prior_pos] = prior_sigma;
    }
    const double wsum = std::accumulate(weight_.begin(), weight_.end(), 0.0);
    for (auto& w : weight_) w /= wsum;
    accept_ = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      accept_ += weight_[i] * (phi((hi_ - mu_[i]) / sigma_[i]) - phi((lo_ - mu_[i]) / sigma_[i]));
  }

  double sample(Rng& rng) const {
    std::discrete_distribution<std::size_t> pick(weight_.begin(), weight_.end());
    std::normal_distribution<double> z(0.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
      const std::size_t i = pick(rng);
      const double x = mu_[i] + sigma_[i] * z(rng);
      if (x >= lo_ && x <= hi_) return x;
    }
    return std::clamp(mu_[pick(rng)], lo_, hi_);
  }

  double log_density(double x) const {
    double p = 0.0;
    for (std::size_t i = 0; i < mu_.size(); ++i) {
      const double z = (x - mu_[i]) / sigma_[i];
      p += weight_[i] * std::exp(-0.5 * z * z) / (sigma_[i] * std::sqrt(2.0 * std::numbers::pi));
    }
    return p > 0.0 ? std::log(p / accept_) : kLogFloor;
  }

  // Probability mass of [a, b].
  double log_mass(double a, double b) const {
    a = std::max(a, lo_);
    b = std::min(b, hi_);
    double p = 0.0;
    for (std::size_t i = 0; i < mu_.size(); ++i)
      p += weight_[i] * (phi((b - mu_[i]) / sigma_[i]) - phi((a - mu_[i]) / sigma_[i]));
    return p > 0.0 ? std::log(p / accept_) : kLogFloor;
  }

 private:
  double lo_, hi_;
  std::vector<double> mu_, sigma_, weight_;
  double accept_ = 1.0;
};

// Numeric parameters: a Parzen estimator per split. Categoricals: smoothed
// frequency tables.
struct Estimator {
  const ParamDomain* domain;
  std::optional<Parzen> numeric;
  std::vector<double> probs;

  Estimator(const ParamDomain& d, const std::vector<const Trial*>& obs, double prior_weight)
      : domain(&d) {
    if (d.kind == ParamKind::categorical) {
      probs.assign(d.choices.size(), 1.0);
      for (const Trial* t : obs) {
        auto it = t->config.find(d.name);
        if (it == t->config.end()) continue;
        for (std::size_t k = 0; k < d.choices.size(); ++k)
          if (d.choices[k] == it->second) probs[k] += 1.0;
      }
      const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
      for (auto& p : probs) p /= total;
    } else {
      std::vector<double> xs;
      for (const Trial* t : obs) {
        auto it = t->config.find(d.name);
        if (it == t->config.end()) continue;
        if (const double* v = std::get_if<double>(&it->second)) xs.push_back(to_transformed(d, *v));
      }
      numeric.emplace(std::move(xs), transformed_range(d), prior_weight);
    }
  }

  ParamValue sample(Rng& rng) const {
    if (!numeric) {
      std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
      return domain->choices[pick(rng)];
    }
    return from_transformed(*domain, numeric->sample(rng));
  }

  double log_prob(const ParamValue& v) const {
    if (!numeric) {
      for (std::size_t k = 0; k < domain->choices.size(); ++k)
        if (domain->choices[k] == v) return std::log(probs[k]);
      return kLogFloor;
    }
    const double x = std::get<double>(v);
    if (!domain->is_int()) return numeric->log_density(to_transformed(*domain, x));
    // Integer values own the mass of their rounding bin.
    const double a = x - 0.5, b = x + 0.5;
    if (domain->is_log())
      return numeric->log_mass(std::log(std::max(a, 1e-12)), std::log(b));
    return numeric->log_mass(a, b);
  }
};

}  // namespace

HyperConfig sample_random(const HyperSpace& space, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HyperConfig c;
  for (const auto& d : space.params) c[d.name] = from_unit(d, u(rng));
  return c;
}

HyperConfig sample_startup(const HyperSpace& space, std::size_t index, std::uint64_t seed) {
  Rng shift_rng(derive_seed(seed, {kShiftTag}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HyperConfig c;
  for (std::size_t k = 0; k < space.params.size(); ++k) {
    const double shift = u(shift_rng);
    double x = radical_inverse(index + 1, nth_prime(k)) + shift;
    x -= std::floor(x);
    c[space.params[k].name] = from_unit(space.params[k], x);
  }
  return c;
}

HyperConfig tpe_suggest(std::span<const Trial> history, const HyperSpace& space, std::uint64_t seed,
                        const TpeConfig& config) {
  if (space.params.empty()) throw std::invalid_argument("empty hyperparameter space");
  if (history.size() < static_cast<std::size_t>(config.n_startup))
    return sample_startup(space, history.size(), seed);

  Rng rng(derive_seed(seed, {history.size()}));
  std::vector<const Trial*> order;
  for (const auto& t : history) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const Trial* a, const Trial* b) { return a->loss < b->loss; });
  if (order.front()->loss == order.back()->loss) return sample_random(space, rng);

  const auto n_good = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(config.gamma * static_cast<double>(order.size()))), 1,
      order.size() - 1);
  const std::vector<const Trial*> good(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_good));
  const std::vector<const Trial*> bad(order.begin() + static_cast<std::ptrdiff_t>(n_good), order.end());

  std::vector<Estimator> lx, gx;
  for (const auto& d : space.params) {
    lx.emplace_back(d, good, config.prior_weight);
    gx.emplace_back(d, bad, config.prior_weight);
  }

  HyperConfig best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < std::max(1, config.n_candidates); ++c) {
    HyperConfig cand;
    double score = 0.0;
    for (std::size_t k = 0; k < space.params.size(); ++k) {
      const ParamValue v = lx[k].sample(rng);
      score += lx[k].log_prob(v) - gx[k].log_prob(v);
      cand[space.params[k].name] = v;
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(cand);
    }
  }
  return best;
}

std::vector<Trial> tpe_minimize(const HyperSpace& space,
                                const std::function<double(const HyperConfig&, int)>& objective,
                                int n_trials, std::uint64_t seed, const TpeConfig& config) {
  std::vector<Trial> history;
  history.reserve(static_cast<std::size_t>(std::max(0, n_trials)));
  for (int t = 0; t < n_trials; ++t) {
    HyperConfig c = tpe_suggest(history, space, seed, config);
    const double loss = objective(c, t);
    history.push_back({std::move(c), loss});
  }
  return history;
}

std::size_t best_trial(std::span<const Trial> trials) {
  if (trials.empty()) throw std::invalid_argument("no trials");
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i)
    if (trials[i].loss < trials[best].loss) best = i;
  return best;
}

}  // namespace ecogvoice::learn
