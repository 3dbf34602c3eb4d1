#include "ecogvoice/learn/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ecogvoice/csv.hpp"
#include "ecogvoice/error.hpp"

namespace ecogvoice::learn {

namespace {

std::string one_decimal(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", round1(v));
  return buf;
}

bool same_metric(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

double EvalReport::majority_rate() const {
  if (n_rows == 0) return 0.0;
  const double high = static_cast<double>(n_high_rows) / static_cast<double>(n_rows);
  return 100.0 * std::max(high, 1.0 - high);
}

const AlgorithmReport* EvalReport::best() const {
  const AlgorithmReport* b = nullptr;
  for (const auto& a : algorithms)
    if (!b || a.metrics.accuracy > b->metrics.accuracy) b = &a;
  return b;
}

const AlgorithmReport* EvalReport::find(Algorithm a) const {
  for (const auto& r : algorithms)
    if (r.algorithm == a) return &r;
  return nullptr;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["condition"] = condition;
  j["n_rows"] = n_rows;
  j["n_participants"] = n_participants;
  j["n_high_rows"] = n_high_rows;
  j["majority_rate"] = majority_rate();
  j["seed"] = seed;
  j["budget"] = budget;
  j["feature_names"] = feature_names;
  j["fold_plan"] = plan.to_json();
  auto& algs = j["algorithms"] = nlohmann::json::array();
  for (const auto& a : algorithms) {
    nlohmann::json ja;
    ja["algorithm"] = std::string(to_string(a.algorithm));
    ja["pooled"] = learn::to_json(a.pooled);
    ja["metrics"] = learn::to_json(a.metrics);
    auto& folds = ja["folds"] = nlohmann::json::array();
    for (const auto& f : a.folds) {
      nlohmann::json jf;
      jf["fold"] = f.fold;
      jf["test_participants"] = f.test_participants;
      jf["test_rows"] = f.test_rows;
      jf["y_true"] = f.y_true;
      jf["y_pred"] = f.y_pred;
      jf["scores"] = f.scores;
      jf["confusion"] = learn::to_json(f.confusion);
      jf["metrics"] = learn::to_json(compute_metrics(f.confusion));
      jf["selected_features"] = f.selected_features;
      jf["selection_fallback"] = f.selection_fallback;
      jf["best_config"] = learn::to_json(f.best_config);
      jf["best_inner_score"] = f.best_inner_score;
      jf["trial_losses"] = f.trial_losses;
      folds.push_back(std::move(jf));
    }
    algs.push_back(std::move(ja));
  }
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.condition = j.at("condition").get<std::string>();
    r.n_rows = j.at("n_rows").get<std::size_t>();
    r.n_participants = j.at("n_participants").get<std::size_t>();
    r.n_high_rows = j.at("n_high_rows").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.budget = j.at("budget").get<int>();
    r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    r.plan = FoldPlan::from_json(j.at("fold_plan"));
    for (const auto& ja : j.at("algorithms")) {
      AlgorithmReport a;
      a.algorithm = parse_algorithm(ja.at("algorithm").get<std::string>());
      a.pooled = confusion_from_json(ja.at("pooled"));
      for (const auto& jf : ja.at("folds")) {
        FoldResult f;
        f.fold = jf.at("fold").get<int>();
        f.test_participants = jf.at("test_participants").get<std::vector<std::string>>();
        f.test_rows = jf.at("test_rows").get<std::vector<std::size_t>>();
        f.y_true = jf.at("y_true").get<std::vector<int>>();
        f.y_pred = jf.at("y_pred").get<std::vector<int>>();
        f.scores = jf.at("scores").get<std::vector<double>>();
        f.confusion = confusion_from_json(jf.at("confusion"));
        f.selected_features = jf.at("selected_features").get<std::vector<std::string>>();
        f.selection_fallback = jf.at("selection_fallback").get<bool>();
        f.best_config = config_from_json(jf.at("best_config"));
        f.best_inner_score = jf.at("best_inner_score").get<double>();
        f.trial_losses = jf.at("trial_losses").get<std::vector<double>>();
        a.folds.push_back(std::move(f));
      }
      a.metrics = compute_metrics(a.pooled);
      r.algorithms.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed evaluation report: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed evaluation report: ") + e.what());
  }

  for (std::size_t k = 0; k < r.algorithms.size(); ++k) {
    const auto& a = r.algorithms[k];
    Confusion sum;
    for (const auto& f : a.folds) {
      if (!(confusion(f.y_true, f.y_pred) == f.confusion))
        throw DataError("evaluation report: fold confusion disagrees with stored predictions");
      sum += f.confusion;
    }
    if (!(sum == a.pooled))
      throw DataError("evaluation report: pooled counts differ from the fold sums for " +
                      std::string(to_string(a.algorithm)));
    const auto& ja = j.at("algorithms").at(k);
    if (ja.contains("metrics")) {
      const auto& m = ja.at("metrics");
      auto stored = [&](const char* key) {
        return m.at(key).is_null() ? std::nan("") : m.at(key).get<double>();
      };
      if (!same_metric(stored("accuracy"), a.metrics.accuracy) ||
          !same_metric(stored("sensitivity"), a.metrics.sensitivity) ||
          !same_metric(stored("specificity"), a.metrics.specificity) || !same_metric(stored("f1"), a.metrics.f1))
        throw DataError("evaluation report: stored metrics differ from those implied by the confusion counts");
    }
  }
  return r;
}

void EvalReport::write_summary_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "algorithm,accuracy,sensitivity,specificity,f1,tp,fn,tn,fp\n";
  for (const auto& a : algorithms) {
    out << to_string(a.algorithm) << ',' << one_decimal(a.metrics.accuracy) << ','
        << one_decimal(a.metrics.sensitivity) << ',' << one_decimal(a.metrics.specificity) << ','
        << one_decimal(a.metrics.f1) << ',' << a.pooled.tp << ',' << a.pooled.fn << ',' << a.pooled.tn << ','
        << a.pooled.fp << '\n';
  }
}

EvalReport make_report(const features::Dataset& ds, const FoldPlan& plan, std::uint64_t seed, int budget,
                       std::vector<AlgorithmReport> algorithms) {
  EvalReport r;
  r.condition = std::string(features::to_string(ds.mode));
  r.n_rows = ds.rows();
  r.n_participants = ds.participants().size();
  for (int v : ds.y) r.n_high_rows += static_cast<std::size_t>(v);
  r.seed = seed;
  r.budget = budget;
  r.feature_names = ds.feature_names;
  r.plan = plan;
  r.algorithms = std::move(algorithms);
  return r;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace ecogvoice::learn
