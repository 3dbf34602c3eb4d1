#include "ecogvoice/learn/nested_cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecogvoice/error.hpp"
#include "ecogvoice/parallel.hpp"
#include "ecogvoice/rng.hpp"

namespace ecogvoice::learn {

namespace {

constexpr int kFinalPart = -1;

struct Slice {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

// The only path by which the driver reads dataset rows.
Slice gather(const features::Dataset& ds, std::span<const std::size_t> rows, int fold, Phase phase,
             AccessAuditor* auditor) {
  if (auditor) auditor->record(fold, phase, rows);
  Slice s;
  s.x.resize(static_cast<Eigen::Index>(rows.size()), ds.x.cols());
  s.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.x.row(static_cast<Eigen::Index>(i)) = ds.x.row(static_cast<Eigen::Index>(rows[i]));
    s.y[i] = ds.y[rows[i]];
  }
  return s;
}

// Preprocessing fitted on `rows`, each step reading through the gateway.
struct Prepared {
  Preprocessor prep;
  Eigen::MatrixXd x;  // imputed + standardized training rows
  std::vector<int> y;
};

Prepared prepare(const features::Dataset& ds, std::span<const std::size_t> rows, int fold, AccessAuditor* auditor) {
  Prepared p;
  p.prep.fit_medians(gather(ds, rows, fold, Phase::imputation, auditor).x);
  Slice s = gather(ds, rows, fold, Phase::standardization, auditor);
  p.prep.fit_scaling(s.x);
  p.x = p.prep.transform(s.x);
  p.y = std::move(s.y);
  return p;
}

std::vector<std::size_t> select(const features::Dataset& ds, std::span<const std::size_t> rows, const Prepared& p,
                                int fold, int part, const HyperConfig& cfg, const NestedCvConfig& config,
                                SelectionCache& cache, bool* fallback) {
  const int perc = get_int(cfg, "boruta.percentile");
  const int trees = get_int(cfg, "boruta.n_trees");
  auto chosen = cache.get({fold, part, perc, trees}, [&] {
    (void)gather(ds, rows, fold, Phase::selection, config.auditor);
    BorutaConfig bc = config.boruta;
    bc.percentile = perc;
    bc.n_trees = trees;
    const auto seed = derive_seed(config.seed, {tag(SeedTag::boruta), static_cast<std::uint64_t>(fold),
                                                static_cast<std::uint64_t>(part + 1),
                                                static_cast<std::uint64_t>(perc),
                                                static_cast<std::uint64_t>(trees)});
    return boruta_select(p.x, p.y, bc, seed).confirmed;
  });
  if (fallback) *fallback = chosen.empty();
  if (chosen.empty()) {
    chosen.resize(static_cast<std::size_t>(ds.x.cols()));
    std::iota(chosen.begin(), chosen.end(), 0);
  }
  return chosen;
}

double inner_score(const Confusion& c, InnerMetric m) {
  if (m == InnerMetric::f1) {
    const double den = 2.0 * c.tp + c.fp + c.fn;
    return den > 0 ? 2.0 * c.tp / den : 0.0;
  }
  return c.n() > 0 ? static_cast<double>(c.tp + c.tn) / c.n() : 0.0;
}

std::vector<std::size_t> training_rows(const features::Dataset& ds, const FoldPlan& plan, int fold) {
  std::vector<std::string> train;
  for (std::size_t g = 0; g < plan.inner[static_cast<std::size_t>(fold)].size(); ++g)
    for (const auto& id : plan.inner[static_cast<std::size_t>(fold)][g]) train.push_back(id);
  return rows_of(ds, train);
}

std::string fold_context(Algorithm a, int fold) {
  return std::string(to_string(a)) + ", outer fold " + std::to_string(fold) + ": ";
}

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::imputation: return "imputation";
    case Phase::standardization: return "standardization";
    case Phase::selection: return "selection";
    case Phase::tuning: return "tuning";
    case Phase::fitting: return "fitting";
    case Phase::evaluation: return "evaluation";
  }
  return "?";
}

std::vector<std::size_t> SelectionCache::get(const Key& key,
                                             const std::function<std::vector<std::size_t>()>& compute) {
  std::shared_ptr<Entry> e;
  {
    std::lock_guard lock(mutex_);
    auto& slot = entries_[key];
    if (!slot) slot = std::make_shared<Entry>();
    e = slot;
  }
  std::call_once(e->once, [&] { e->value = compute(); });
  return e->value;
}

OuterFit fit_outer_model(const features::Dataset& ds, const FoldPlan& plan, int fold, Algorithm algorithm,
                         const HyperConfig& best, const NestedCvConfig& config, SelectionCache* cache) {
  SelectionCache local;
  SelectionCache& sc = cache ? *cache : local;
  OuterFit out;
  out.train_rows = training_rows(ds, plan, fold);
  const Prepared p = prepare(ds, out.train_rows, fold, config.auditor);
  auto selected = select(ds, out.train_rows, p, fold, kFinalPart, best, config, sc, &out.selection_fallback);
  const Slice fit_rows = gather(ds, out.train_rows, fold, Phase::fitting, config.auditor);
  (void)fit_rows;
  out.model = fit_model(algorithm, p.prep, p.x, p.y, best, std::move(selected),
                        derive_seed(config.seed, {tag(SeedTag::fit_final), static_cast<std::uint64_t>(fold)}));
  return out;
}

AlgorithmReport nested_cv(const features::Dataset& ds, Algorithm algorithm, const FoldPlan& plan,
                          const NestedCvConfig& config, SelectionCache* cache) {
  plan.validate(ds);
  if (config.budget < 1) throw std::invalid_argument("budget must be at least 1");
  SelectionCache local;
  SelectionCache& sc = cache ? *cache : local;
  const HyperSpace space = joint_space(algorithm);
  const auto n_outer = static_cast<int>(plan.n_outer());
  std::vector<FoldResult> results(static_cast<std::size_t>(n_outer));

  parallel_for(static_cast<std::size_t>(n_outer), config.jobs, [&](std::size_t fi) {
    const int fold = static_cast<int>(fi);
    try {
      const auto& parts = plan.inner[fi];
      const int n_inner = static_cast<int>(parts.size());

      // Per inner split: preprocessing on its training rows, validation rows.
      std::vector<std::vector<std::size_t>> tr_rows(static_cast<std::size_t>(n_inner)),
          va_rows(static_cast<std::size_t>(n_inner));
      std::vector<Prepared> prepared;
      std::vector<Slice> validation;
      for (int j = 0; j < n_inner; ++j) {
        std::vector<std::string> train;
        for (int g = 0; g < n_inner; ++g)
          if (g != j)
            for (const auto& id : parts[static_cast<std::size_t>(g)]) train.push_back(id);
        tr_rows[static_cast<std::size_t>(j)] = rows_of(ds, train);
        va_rows[static_cast<std::size_t>(j)] = rows_of(ds, parts[static_cast<std::size_t>(j)]);
        prepared.push_back(prepare(ds, tr_rows[static_cast<std::size_t>(j)], fold, config.auditor));
        validation.push_back(gather(ds, va_rows[static_cast<std::size_t>(j)], fold, Phase::tuning, config.auditor));
      }

      auto objective = [&](const HyperConfig& cfg, int trial) {
        double total = 0.0;
        for (int j = 0; j < n_inner; ++j) {
          const auto& p = prepared[static_cast<std::size_t>(j)];
          auto selected = select(ds, tr_rows[static_cast<std::size_t>(j)], p, fold, j, cfg, config, sc, nullptr);
          const auto model = fit_model(algorithm, p.prep, p.x, p.y, cfg, std::move(selected),
                                       derive_seed(config.seed, {tag(SeedTag::fit_inner), fi,
                                                                 static_cast<std::uint64_t>(trial),
                                                                 static_cast<std::uint64_t>(j)}));
          const auto& v = validation[static_cast<std::size_t>(j)];
          total += inner_score(confusion(v.y, model.predict(v.x)), config.metric);
        }
        return -total / n_inner;
      };
      const auto tpe_seed = derive_seed(config.seed, {tag(SeedTag::tpe), fi, static_cast<std::uint64_t>(algorithm)});
      const auto trials = tpe_minimize(space, objective, config.budget, tpe_seed, config.tpe);
      const auto& best = trials[best_trial(trials)];

      FoldResult& r = results[fi];
      r.fold = fold;
      r.best_config = best.config;
      r.best_inner_score = -best.loss;
      for (const auto& t : trials) r.trial_losses.push_back(t.loss);

      const OuterFit fit = fit_outer_model(ds, plan, fold, algorithm, best.config, config, &sc);
      r.selection_fallback = fit.selection_fallback;
      for (auto c : fit.model.selected) r.selected_features.push_back(ds.feature_names[c]);

      r.test_participants = plan.outer[fi];
      r.test_rows = rows_of(ds, plan.outer[fi]);
      const Slice test = gather(ds, r.test_rows, fold, Phase::evaluation, config.auditor);
      const Eigen::VectorXd s = fit.model.score(test.x);
      r.y_true = test.y;
      r.scores.assign(s.data(), s.data() + s.size());
      r.y_pred.resize(r.y_true.size());
      for (std::size_t i = 0; i < r.y_pred.size(); ++i) r.y_pred[i] = r.scores[i] > fit.model.threshold() ? 1 : 0;
      r.confusion = confusion(r.y_true, r.y_pred);
    } catch (const DataError& e) {
      throw DataError(fold_context(algorithm, fold) + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(fold_context(algorithm, fold) + e.what());
    }
  });

  AlgorithmReport rep;
  rep.algorithm = algorithm;
  rep.folds = std::move(results);
  for (const auto& f : rep.folds) rep.pooled += f.confusion;
  rep.metrics = compute_metrics(rep.pooled);
  return rep;
}

LeakageAudit::LeakageAudit(const features::Dataset& ds, const FoldPlan& plan) {
  for (const auto& test : plan.outer) {
    std::vector<bool> mask(ds.rows(), false);
    for (auto r : rows_of(ds, test)) mask[r] = true;
    is_test_.push_back(std::move(mask));
  }
}

void LeakageAudit::record(int outer_fold, Phase phase, std::span<const std::size_t> rows) {
  const auto& mask = is_test_.at(static_cast<std::size_t>(outer_fold));
  std::size_t hits = 0;
  for (auto r : rows) hits += mask.at(r) ? 1 : 0;
  std::lock_guard lock(mutex_);
  auto& t = tallies_[{outer_fold, phase}];
  t.reads += rows.size();
  t.test_reads += hits;
}

std::size_t LeakageAudit::violations() const {
  std::lock_guard lock(mutex_);
  std::size_t v = 0;
  for (const auto& [key, t] : tallies_)
    if (key.second != Phase::evaluation) v += t.test_reads;
  return v;
}

nlohmann::json LeakageAudit::to_json() const {
  std::lock_guard lock(mutex_);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [key, t] : tallies_)
    j.push_back({{"outer_fold", key.first},
                 {"phase", std::string(to_string(key.second))},
                 {"rows_read", t.reads},
                 {"test_rows_read", t.test_reads}});
  return j;
}

}  // namespace ecogvoice::learn
