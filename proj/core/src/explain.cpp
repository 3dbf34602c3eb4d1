#include "ecogvoice/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ecogvoice/csv.hpp"
#include "ecogvoice/error.hpp"
#include "ecogvoice/parallel.hpp"
#include "ecogvoice/rng.hpp"

namespace ecogvoice::explain {

namespace {

std::vector<std::size_t> ranked_order(const Eigen::VectorXd& v) {
  std::vector<std::size_t> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v(static_cast<Eigen::Index>(a)) > v(static_cast<Eigen::Index>(b));
  });
  return order;
}

}  // namespace

std::vector<FeatureFrequency> selection_frequency(const std::vector<std::vector<std::string>>& per_fold,
                                                  const std::vector<std::string>& names) {
  std::vector<FeatureFrequency> out;
  const double folds = static_cast<double>(per_fold.size());
  for (const auto& n : names) {
    int count = 0;
    for (const auto& f : per_fold)
      if (std::find(f.begin(), f.end(), n) != f.end()) ++count;
    const double freq = folds > 0 ? count / folds : 0.0;
    out.push_back({n, freq, freq > 0.5});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureFrequency& a, const FeatureFrequency& b) { return a.frequency > b.frequency; });
  return out;
}

std::vector<FeatureFrequency> selection_frequency(const learn::AlgorithmReport& report,
                                                  const std::vector<std::string>& names) {
  std::vector<std::vector<std::string>> per_fold;
  for (const auto& f : report.folds) per_fold.push_back(f.selected_features);
  return selection_frequency(per_fold, names);
}

ShapleyResult shapley_values(const ModelFn& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& background,
                             std::span<const std::size_t> subset, const ShapleyConfig& config, std::uint64_t seed,
                             int jobs) {
  if (background.rows() == 0) throw std::invalid_argument("shapley: empty background");
  if (config.n_permutations < 50) throw std::invalid_argument("shapley: at least 50 permutations required");
  if (background.cols() != x.cols()) throw std::invalid_argument("shapley: background width mismatch");
  const Eigen::Index n = x.rows(), p = x.cols();
  const auto k = static_cast<Eigen::Index>(subset.size());
  const int pairs = (config.n_permutations + 1) / 2;
  const Eigen::Index n_bg = background.rows();

  ShapleyResult res;
  res.values = Eigen::MatrixXd::Zero(n, p);
  res.std_error = Eigen::MatrixXd::Zero(n, p);
  res.output = model(x);
  const Eigen::VectorXd bg_out = model(background);
  res.base_value = bg_out.mean();
  res.local_error_se = Eigen::VectorXd::Zero(n);
  if (k == 0 || n == 0) return res;

  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t si) {
    const auto s = static_cast<Eigen::Index>(si);
    Rng rng(derive_seed(seed, {tag(SeedTag::shapley), static_cast<std::uint64_t>(si)}));
    std::vector<Eigen::Index> bg_order(static_cast<std::size_t>(n_bg));
    std::iota(bg_order.begin(), bg_order.end(), 0);
    std::shuffle(bg_order.begin(), bg_order.end(), rng);

    // Each permutation contributes k + 1 rows: the background row with
    // features switched to x one at a time in permutation order.
    Eigen::MatrixXd z(2 * pairs * (k + 1), p);
    std::vector<std::vector<std::size_t>> perms(static_cast<std::size_t>(2 * pairs));
    std::vector<std::size_t> order(subset.begin(), subset.end());
    for (int m = 0; m < pairs; ++m) {
      std::shuffle(order.begin(), order.end(), rng);
      perms[static_cast<std::size_t>(2 * m)] = order;
      perms[static_cast<std::size_t>(2 * m + 1)].assign(order.rbegin(), order.rend());
      const Eigen::Index b = bg_order[static_cast<std::size_t>(m % n_bg)];
      for (int side = 0; side < 2; ++side) {
        const auto& perm = perms[static_cast<std::size_t>(2 * m + side)];
        Eigen::Index row = (2 * m + side) * (k + 1);
        z.row(row) = background.row(b);
        for (Eigen::Index j = 0; j < k; ++j) {
          z.row(row + j + 1) = z.row(row + j);
          const auto c = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]);
          z(row + j + 1, c) = x(s, c);
        }
      }
    }
    const Eigen::VectorXd fz = model(z);

    Eigen::MatrixXd contrib(pairs, p);  // per-pair averaged marginal contributions
    contrib.setZero();
    Eigen::VectorXd bg_used(pairs);
    for (int m = 0; m < pairs; ++m) {
      for (int side = 0; side < 2; ++side) {
        const auto& perm = perms[static_cast<std::size_t>(2 * m + side)];
        const Eigen::Index row = (2 * m + side) * (k + 1);
        for (Eigen::Index j = 0; j < k; ++j)
          contrib(m, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)])) +=
              0.5 * (fz(row + j + 1) - fz(row + j));
      }
      bg_used(m) = fz(2 * m * (k + 1));
    }
    for (std::size_t q = 0; q < subset.size(); ++q) {
      const auto c = static_cast<Eigen::Index>(subset[q]);
      const double mean = contrib.col(c).mean();
      res.values(s, c) = mean;
      if (pairs > 1) {
        const double var = (contrib.col(c).array() - mean).square().sum() / (pairs - 1);
        res.std_error(s, c) = std::sqrt(var / pairs);
      }
    }
    // sum(values) = f(x) - mean(bg_used); its gap to the full background mean
    // vanishes when every background row is used equally often.
    const double gap_sd = pairs > 1 ? std::sqrt((bg_used.array() - bg_used.mean()).square().sum() / (pairs - 1)) : 0.0;
    const bool balanced = pairs % n_bg == 0;
    res.local_error_se(s) = balanced ? 0.0 : gap_sd / std::sqrt(static_cast<double>(pairs));
  });
  return res;
}

std::vector<std::pair<std::string, double>> ImportanceReport::ranking() const {
  std::vector<std::pair<std::string, double>> out;
  for (auto i : ranked_order(mean_abs)) out.emplace_back(feature_names[i], mean_abs(static_cast<Eigen::Index>(i)));
  return out;
}

std::vector<std::string> ImportanceReport::robust_features() const {
  std::vector<std::string> out;
  for (const auto& f : frequency)
    if (f.robust) out.push_back(f.name);
  return out;
}

nlohmann::json ImportanceReport::to_json() const {
  nlohmann::json j;
  j["condition"] = condition;
  j["algorithm"] = std::string(learn::to_string(algorithm));
  auto& freq = j["selection_frequency"] = nlohmann::json::array();
  for (const auto& f : frequency) freq.push_back({{"feature", f.name}, {"frequency", f.frequency}, {"robust", f.robust}});
  auto& rank = j["mean_abs_shapley"] = nlohmann::json::array();
  for (const auto& [name, v] : ranking()) rank.push_back({{"feature", name}, {"value", v}});
  j["rows"] = static_cast<std::size_t>(shapley.rows());
  return j;
}

void ImportanceReport::write_attribution_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  std::vector<std::string> header = {"feature"};
  for (std::size_t r = 0; r < participants.size(); ++r)
    header.push_back(questions[r].empty() ? participants[r] : participants[r] + ":" + questions[r]);
  out << csv::join(header) << '\n';
  for (std::size_t c = 0; c < feature_names.size(); ++c) {
    std::vector<std::string> row = {feature_names[c]};
    for (Eigen::Index r = 0; r < shapley.rows(); ++r)
      row.push_back(csv::format_number(shapley(r, static_cast<Eigen::Index>(c))));
    out << csv::join(row) << '\n';
  }
}

ImportanceReport explain_report(const features::Dataset& ds, const learn::EvalReport& report,
                                learn::Algorithm algorithm, const learn::NestedCvConfig& cv,
                                const ExplainConfig& config) {
  if (report.feature_names != ds.feature_names)
    throw DataError("feature namespace of the evaluation report differs from the feature table");
  if (report.condition != features::to_string(ds.mode))
    throw DataError("evaluation report is for condition '" + report.condition + "', features built for '" +
                    std::string(features::to_string(ds.mode)) + "'");
  const auto* alg = report.find(algorithm);
  if (!alg) throw DataError("evaluation report has no results for " + std::string(learn::to_string(algorithm)));
  report.plan.validate(ds);

  ImportanceReport out;
  out.condition = report.condition;
  out.algorithm = algorithm;
  out.feature_names = ds.feature_names;
  out.frequency = selection_frequency(*alg, ds.feature_names);

  const auto p = static_cast<Eigen::Index>(ds.features());
  std::vector<std::size_t> all_rows;
  std::vector<Eigen::MatrixXd> fold_values;
  std::vector<Eigen::VectorXd> fold_output;
  std::vector<double> fold_base;
  learn::SelectionCache cache;
  for (const auto& fr : alg->folds) {
    const auto fit = learn::fit_outer_model(ds, report.plan, fr.fold, algorithm, fr.best_config, cv, &cache);
    const auto test_rows = learn::rows_of(ds, report.plan.outer[static_cast<std::size_t>(fr.fold)]);
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(test_rows.size()), p);
    for (std::size_t i = 0; i < test_rows.size(); ++i) xt.row(static_cast<Eigen::Index>(i)) = ds.x.row(static_cast<Eigen::Index>(test_rows[i]));
    if (fit.model.predict(xt) != fr.y_pred)
      throw DataError("refitting outer fold " + std::to_string(fr.fold) +
                      " does not reproduce the stored predictions; the feature table, seed or config differ from the evaluation run");

    Rng rng(derive_seed(config.seed, {tag(SeedTag::background), static_cast<std::uint64_t>(fr.fold)}));
    std::vector<std::size_t> pool = fit.train_rows;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(1, config.background_rows))));
    Eigen::MatrixXd bg(static_cast<Eigen::Index>(pool.size()), p);
    for (std::size_t i = 0; i < pool.size(); ++i) bg.row(static_cast<Eigen::Index>(i)) = ds.x.row(static_cast<Eigen::Index>(pool[i]));

    const auto model = fit.model;
    const auto res = shapley_values([&](const Eigen::MatrixXd& m) { return model.score(m); }, xt, bg,
                                    model.selected, config.shapley,
                                    derive_seed(config.seed, {tag(SeedTag::shapley), static_cast<std::uint64_t>(fr.fold)}),
                                    config.jobs);
    all_rows.insert(all_rows.end(), test_rows.begin(), test_rows.end());
    fold_values.push_back(res.values);
    fold_output.push_back(res.output);
    fold_base.push_back(res.base_value);
  }

  const auto total = static_cast<Eigen::Index>(all_rows.size());
  out.shapley.resize(total, p);
  out.output.resize(total);
  out.base.resize(total);
  Eigen::Index r = 0;
  for (std::size_t f = 0; f < fold_values.size(); ++f)
    for (Eigen::Index i = 0; i < fold_values[f].rows(); ++i, ++r) {
      out.shapley.row(r) = fold_values[f].row(i);
      out.output(r) = fold_output[f](i);
      out.base(r) = fold_base[f];
    }
  for (auto row : all_rows) {
    out.participants.push_back(ds.participant[row]);
    out.questions.push_back(ds.question[row]);
  }
  out.mean_abs = total > 0 ? Eigen::VectorXd(out.shapley.cwiseAbs().colwise().mean().transpose())
                           : Eigen::VectorXd::Zero(p);
  return out;
}

CommonFeatures common_features(const std::vector<std::string>& robust_a,
                               const std::vector<std::pair<std::string, double>>& importance_a,
                               const std::vector<std::string>& robust_b,
                               const std::vector<std::pair<std::string, double>>& importance_b) {
  const std::map<std::string, double> ia(importance_a.begin(), importance_a.end());
  const std::map<std::string, double> ib(importance_b.begin(), importance_b.end());
  auto value = [](const std::map<std::string, double>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };
  CommonFeatures out;
  const std::set<std::string> in_b(robust_b.begin(), robust_b.end());
  for (const auto& f : robust_a)
    if (in_b.count(f)) out.common.push_back(f);
  double ta = 0.0, tb = 0.0, ca = 0.0, cb = 0.0;
  for (const auto& f : robust_a) ta += value(ia, f);
  for (const auto& f : robust_b) tb += value(ib, f);
  for (const auto& f : out.common) {
    ca += value(ia, f);
    cb += value(ib, f);
  }
  out.fraction_a = ta > 0.0 ? ca / ta : 0.0;
  out.fraction_b = tb > 0.0 ? cb / tb : 0.0;
  return out;
}

}  // namespace ecogvoice::explain
