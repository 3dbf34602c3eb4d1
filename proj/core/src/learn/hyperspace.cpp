#include "ecogvoice/learn/hyperspace.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "ecogvoice/error.hpp"

namespace ecogvoice::learn {

namespace {

constexpr std::array<Algorithm, 5> kAlgorithms = {Algorithm::knn, Algorithm::logreg, Algorithm::svm,
                                                  Algorithm::gbt_a, Algorithm::gbt_b};

ParamDomain real(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::uniform, lo, hi, {}};
}
ParamDomain logr(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::log_uniform, lo, hi, {}};
}
ParamDomain integer(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::int_uniform, lo, hi, {}};
}
ParamDomain log_integer(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::log_int, lo, hi, {}};
}
ParamDomain cat(std::string name, std::vector<ParamValue> choices) {
  return {std::move(name), ParamKind::categorical, 0.0, 0.0, std::move(choices)};
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::knn: return "knn";
    case Algorithm::logreg: return "logreg";
    case Algorithm::svm: return "svm";
    case Algorithm::gbt_a: return "gbt-a";
    case Algorithm::gbt_b: return "gbt-b";
  }
  return "knn";
}

Algorithm parse_algorithm(std::string_view s) {
  for (auto a : kAlgorithms)
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) +
                              "' (knn, logreg, svm, gbt-a, gbt-b)");
}

std::span<const Algorithm> all_algorithms() { return kAlgorithms; }

bool ParamDomain::contains(const ParamValue& v) const {
  if (kind == ParamKind::categorical) {
    for (const auto& c : choices)
      if (c == v) return true;
    return false;
  }
  const double* d = std::get_if<double>(&v);
  if (!d || !std::isfinite(*d) || *d < lo || *d > hi) return false;
  return !is_int() || *d == std::round(*d);
}

const ParamDomain* HyperSpace::find(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

bool HyperSpace::contains(const HyperConfig& config) const {
  for (const auto& p : params) {
    auto it = config.find(p.name);
    if (it == config.end() || !p.contains(it->second)) return false;
  }
  return true;
}

HyperSpace model_space(Algorithm a) {
  HyperSpace s;
  switch (a) {
    case Algorithm::knn:
      s.params = {integer("n_neighbors", 1, 20),
                  cat("weights", {"uniform", "distance"}),
                  cat("metric", {"euclidean", "manhattan", "minkowski"})};
      break;
    case Algorithm::logreg:
      s.params = {cat("penalty", {"elasticnet", "l1", "l2", "none"}),
                  logr("C", 1.0, 1e4),
                  real("l1_ratio", 0.1, 0.9),
                  cat("solver", {"saga"})};
      break;
    case Algorithm::svm:
      s.params = {cat("kernel", {"rbf", "linear"}),
                  logr("C", 1e-2, 1e2),
                  logr("gamma", 1e-3, 1.0)};
      break;
    case Algorithm::gbt_a:
      s.params = {cat("booster", {"gbtree", "gblinear", "dart"}),
                  real("lambda", 1.0, 4.0),
                  logr("alpha", 1e-8, 1e2),
                  real("subsample", 0.5, 1.0),
                  real("colsample_bytree", 0.5, 1.0),
                  integer("max_depth", 1, 11),
                  log_integer("min_child_weight", 1, 100),
                  logr("eta", 1e-8, 1.0),
                  logr("gamma", 1e-8, 7.0),
                  cat("grow_policy", {"depthwise", "lossguide"}),
                  cat("sample_type", {"uniform", "weighted"}),
                  cat("normalize_type", {"tree", "forest"}),
                  logr("rate_drop", 1e-8, 1.0),
                  logr("skip_drop", 1e-8, 1.0)};
      break;
    case Algorithm::gbt_b:
      s.params = {logr("lambda_l1", 1.0, 10.0),
                  logr("lambda_l2", 1e-2, 1.0),
                  integer("num_leaves", 10, 32),
                  real("feature_fraction", 0.1, 0.5),
                  real("bagging_fraction", 0.8, 1.0),
                  integer("bagging_freq", 3, 7)};
      break;
  }
  return s;
}

HyperSpace boruta_space() {
  HyperSpace s;
  s.params = {cat("boruta.percentile", {80.0, 90.0, 100.0}), cat("boruta.n_trees", {100.0, 300.0})};
  return s;
}

HyperSpace joint_space(Algorithm a) {
  HyperSpace s = boruta_space();
  for (auto& p : model_space(a).params) s.params.push_back(std::move(p));
  return s;
}

double get_number(const HyperConfig& c, const std::string& name) {
  auto it = c.find(name);
  if (it == c.end()) throw std::invalid_argument("missing hyperparameter '" + name + "'");
  if (const double* d = std::get_if<double>(&it->second)) return *d;
  throw std::invalid_argument("hyperparameter '" + name + "' is not numeric");
}

int get_int(const HyperConfig& c, const std::string& name) {
  return static_cast<int>(std::lround(get_number(c, name)));
}

const std::string& get_string(const HyperConfig& c, const std::string& name) {
  auto it = c.find(name);
  if (it == c.end()) throw std::invalid_argument("missing hyperparameter '" + name + "'");
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw std::invalid_argument("hyperparameter '" + name + "' is not a string");
}

nlohmann::json to_json(const HyperConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : c) {
    if (const double* d = std::get_if<double>(&v))
      j[k] = *d;
    else
      j[k] = std::get<std::string>(v);
  }
  return j;
}

HyperConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("hyperparameter config must be a JSON object");
  HyperConfig c;
  for (const auto& [k, v] : j.items()) {
    if (v.is_number())
      c[k] = v.get<double>();
    else if (v.is_string())
      c[k] = v.get<std::string>();
    else
      throw DataError("hyperparameter '" + k + "' must be a number or string");
  }
  return c;
}

}  // namespace ecogvoice::learn
